#include "srwd/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace srwd {

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IoError("checkpoint: truncated file");
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

void put_f32(std::ostream& os, float f) {
    uint32_t v;
    static_assert(sizeof(v) == sizeof(f));
    std::memcpy(&v, &f, 4);
    put_u32(os, v);
}

float get_f32(std::istream& is) {
    uint32_t v = get_u32(is);
    float f;
    std::memcpy(&f, &v, 4);
    return f;
}

}  // namespace

void write_tensors(const std::string& path, const std::vector<NamedTensor>& tensors) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(kCheckpointMagic, 4);
    os.put(char(kCheckpointVersion));
    for (const auto& t : tensors) {
        put_u32(os, uint32_t(t.name.size()));
        os.write(t.name.data(), std::streamsize(t.name.size()));
        put_u32(os, uint32_t(t.dims.size()));
        size_t count = 1;
        for (uint32_t d : t.dims) {
            put_u32(os, d);
            count *= d;
        }
        if (count != t.data.size()) throw IoError("checkpoint: dims/payload mismatch for " + t.name);
        for (float f : t.data) put_f32(os, f);
    }
    if (!os) throw IoError("write failed: " + path);
}

std::vector<NamedTensor> read_tensors(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw IoError("checkpoint: bad magic in " + path);
    int version = is.get();
    if (version != kCheckpointVersion)
        throw IoError("checkpoint: unsupported format version in " + path);
    std::vector<NamedTensor> tensors;
    while (is.peek() != EOF) {
        NamedTensor t;
        uint32_t name_len = get_u32(is);
        t.name.resize(name_len);
        is.read(t.name.data(), name_len);
        uint32_t rank = get_u32(is);
        size_t count = 1;
        for (uint32_t r = 0; r < rank; ++r) {
            t.dims.push_back(get_u32(is));
            count *= t.dims.back();
        }
        t.data.resize(count);
        for (size_t i = 0; i < count; ++i) t.data[i] = get_f32(is);
        if (!is) throw IoError("checkpoint: truncated tensor in " + path);
        tensors.push_back(std::move(t));
    }
    return tensors;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::vector<NamedTensor> tensors;
    for (auto& ref : const_cast<ModelParams&>(params).tensors())
        tensors.push_back({ref.name, ref.dims, *ref.data});
    write_tensors(path, tensors);
    write_sidecar(path, {{"vocab_size", std::to_string(params.dims.vocab_size)},
                         {"E", std::to_string(params.dims.emb_dim)},
                         {"H", std::to_string(params.dims.hidden_dim)},
                         {"iteration", std::to_string(params.iteration)},
                         {"seed", std::to_string(params.seed)}});
}

ModelParams load_checkpoint(const std::string& path) {
    auto meta = read_sidecar(path);
    auto need = [&](const char* k) {
        auto it = meta.find(k);
        if (it == meta.end()) throw IoError("checkpoint sidecar missing key '" + std::string(k) + "'");
        return it->second;
    };
    ModelParams p = init_params(int32_t(std::stol(need("vocab_size"))),
                                int32_t(std::stol(need("E"))), int32_t(std::stol(need("H"))),
                                std::stoull(need("seed")));
    p.iteration = std::stoll(need("iteration"));
    auto tensors = read_tensors(path);
    for (auto& ref : p.tensors()) {
        bool found = false;
        for (const auto& t : tensors) {
            if (t.name != ref.name) continue;
            if (t.dims != ref.dims) throw IoError("checkpoint: dim mismatch for tensor " + t.name);
            *ref.data = t.data;
            found = true;
            break;
        }
        if (!found) throw IoError("checkpoint: missing tensor " + std::string(ref.name));
    }
    return p;
}

void write_sidecar(const std::string& path, const std::map<std::string, std::string>& kv) {
    std::ofstream os(path + ".meta", std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path + ".meta");
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_sidecar(const std::string& path) {
    std::ifstream is(path + ".meta");
    if (!is) throw IoError("cannot open for reading: " + path + ".meta");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace srwd
