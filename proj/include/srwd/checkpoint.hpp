#pragma once

#include <map>
#include <string>
#include <vector>

#include "srwd/model.hpp"

namespace srwd {

// Checkpoint container: magic "SRWD", one format-version byte, then per
// tensor: u32 name length, UTF-8 name, u32 rank, u32 dims, f32 payload.
// All integers and floats little-endian; payload row-major.
inline constexpr char kCheckpointMagic[4] = {'S', 'R', 'W', 'D'};
inline constexpr uint8_t kCheckpointVersion = 1;

struct NamedTensor {
    std::string name;
    std::vector<uint32_t> dims;
    std::vector<float> data;
};

void write_tensors(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensors(const std::string& path);

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

// Sidecar metadata (<path>.meta): plain text key=value lines.
void write_sidecar(const std::string& path, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_sidecar(const std::string& path);

}  // namespace srwd
