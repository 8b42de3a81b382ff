#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sau/model.hpp"
#include "sau/param_set.hpp"
#include "sau/pruning.hpp"
#include "sau/saliency.hpp"
#include "sau/sau_plan.hpp"

namespace sau {

// SAUCKPT1 binary container. Layout, all integers little-endian:
//   bytes 0..7   magic "SAUCKPT" + version digit ('1')
//   u32          record count
//   per record:  u16 name length, UTF-8 name,
//                u8 dtype (0 = f64, 1 = u8),
//                u8 rank, rank x u64 dims,
//                payload (f64 values LE, or raw u8 bytes)
//   32 bytes     content hash: FNV-1a 64 over everything before it, then
//                extended to 32 bytes by iterating splitmix64 four times
// Round trips are bit-exact; the hash is validated on load.
enum class Dtype : std::uint8_t { f64 = 0, u8 = 1 };

struct Record {
    std::string name;
    Dtype dtype = Dtype::f64;
    std::vector<std::int64_t> shape;
    std::vector<double> f64_data;       // when dtype == f64
    std::vector<std::uint8_t> u8_data;  // when dtype == u8
};

// Whole-file atomic write (temp file + rename).
void save_checkpoint(const std::string& path, const std::vector<Record>& records);
std::vector<Record> load_checkpoint(const std::string& path);

// Named sections inside one container, distinguished by name prefixes:
//   param/<name>      model parameters (f64)
//   meta              JSON bytes: model config + prunable names (u8)
//   mask/<layer>      sparsity mask (u8) + mask_meta JSON (u8)
//   saliency/<name>   saliency scores (f64) + saliency_meta JSON (u8)
//   plan_g/<layer>    gradient mask (u8)
//   plan_w/<layer>    redistribution weights (f64)
//   plan_meta         JSON: config, per-layer scalars, reference hashes (u8)
struct CheckpointBundle {
    std::optional<ModelConfig> model_config;
    std::optional<ParamSet> params;
    std::optional<SparsityMask> mask;
    std::optional<SaliencyMap> saliency;
    std::optional<SAUPlan> plan;

    std::vector<Record> to_records() const;
    static CheckpointBundle from_records(const std::vector<Record>& records);
};

void save_bundle(const std::string& path, const CheckpointBundle& bundle);
CheckpointBundle load_bundle(const std::string& path);

// Loads a bundle and instantiates its model (config + params required).
Model load_model(const std::string& path);

}  // namespace sau
