#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "learnfbp/data.hpp"
#include "learnfbp/filters.hpp"
#include "learnfbp/phantom.hpp"

namespace learnfbp {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum class DType { F32, F64 };

std::string to_string(DType dtype);
DType dtype_from_string(const std::string& name);

/**
 * Tensor on disk: `<name>.json` header with dtype, shape, byte_order
 * ("little"), tag, payload file name and free-form meta; `<name>.bin`
 * holds the raw row-major payload.
 */
struct Tensor {
    Shape shape;
    std::string tag;
    DType dtype = DType::F64;
    json meta = json::object();
    std::vector<double> data;
};

/// `header` must end in .json; the payload goes next to it with .bin.
void write_tensor(const fs::path& header, const Tensor& tensor);
Tensor read_tensor(const fs::path& header);

/// 64-bit FNV-1a over a file's bytes, as 16 hex digits.
std::string file_checksum(const fs::path& path);
std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t h = 14695981039346656037ULL);

void write_volume(const fs::path& header, const VolumeImage& vol);
VolumeImage read_volume(const fs::path& header);
void write_stack(const fs::path& header, const ProjectionStack& stack);
ProjectionStack read_stack(const fs::path& header);

/**
 * Params manifest `<name>.json` referencing `<name>.filter.json` and, when
 * present, `<name>.weight.json`.
 */
void write_params(const fs::path& manifest, const FilterParams& params);
FilterParams read_params(const fs::path& manifest);

/// Directory with x_NNNN / y_NNNN tensors and manifest.json (sizes, seed, SNR, checksums).
void write_dataset(const fs::path& dir, const Dataset& data);
Dataset read_dataset(const fs::path& dir);

/// Throws IoError on any stream failure.
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

} // namespace learnfbp
