#include "learnfbp/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "learnfbp/errors.hpp"

namespace learnfbp {

std::string to_string(DType dtype) { return dtype == DType::F32 ? "f32" : "f64"; }

DType dtype_from_string(const std::string& name) {
    if (name == "f32") return DType::F32;
    if (name == "f64") return DType::F64;
    throw ValidationError("unknown dtype '" + name + "'");
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T> void to_little(T& v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
}

fs::path payload_path(const fs::path& header) {
    fs::path p = header;
    return p.replace_extension(".bin");
}

void require_json_path(const fs::path& header) {
    require(header.extension() == ".json", "tensor header must end in .json: " + header.string());
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

Shape shape_from_json(const json& j) {
    require(j.is_array(), "shape must be an array");
    Shape s;
    for (const auto& e : j) {
        require(e.is_number_unsigned(), "shape entries must be non-negative integers");
        s.push_back(e.get<std::size_t>());
    }
    return s;
}

json parse_json_file(const fs::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

} // namespace

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.close();
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t h) {
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string file_checksum(const fs::path& path) {
    const auto bytes = read_bytes(path);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

void write_tensor(const fs::path& header, const Tensor& t) {
    require_json_path(header);
    require(element_count(t.shape) == t.data.size(),
            "tensor data size does not match shape " + shape_string(t.shape));
    const fs::path payload = payload_path(header);

    std::vector<unsigned char> bytes;
    if (t.dtype == DType::F64) {
        bytes.resize(t.data.size() * 8);
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            double v = t.data[i];
            to_little(v);
            std::memcpy(bytes.data() + 8 * i, &v, 8);
        }
    } else {
        bytes.resize(t.data.size() * 4);
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            float v = static_cast<float>(t.data[i]);
            to_little(v);
            std::memcpy(bytes.data() + 4 * i, &v, 4);
        }
    }
    {
        std::ofstream out(payload, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + payload.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + payload.string());
    }
    json h = {{"dtype", to_string(t.dtype)},
              {"shape", t.shape},
              {"byte_order", "little"},
              {"tag", t.tag},
              {"payload", payload.filename().string()},
              {"meta", t.meta}};
    write_text(header, h.dump(2) + "\n");
}

Tensor read_tensor(const fs::path& header) {
    require_json_path(header);
    const json h = parse_json_file(header);
    Tensor t;
    try {
        t.dtype = dtype_from_string(h.at("dtype").get<std::string>());
        t.shape = shape_from_json(h.at("shape"));
        t.tag = h.at("tag").get<std::string>();
        require(h.at("byte_order").get<std::string>() == "little",
                "unsupported byte order in " + header.string());
        if (h.contains("meta")) t.meta = h.at("meta");
        const fs::path payload = header.parent_path() / h.at("payload").get<std::string>();
        const auto bytes = read_bytes(payload);
        const std::size_t n = element_count(t.shape);
        const std::size_t width = t.dtype == DType::F64 ? 8 : 4;
        if (bytes.size() != n * width)
            throw IoError("payload " + payload.string() + " has " +
                          std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(n * width));
        t.data.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (width == 8) {
                double v;
                std::memcpy(&v, bytes.data() + 8 * i, 8);
                to_little(v);
                t.data[i] = v;
            } else {
                float v;
                std::memcpy(&v, bytes.data() + 4 * i, 4);
                to_little(v);
                t.data[i] = v;
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError("bad tensor header " + header.string() + ": " + e.what());
    }
    return t;
}

void write_volume(const fs::path& header, const VolumeImage& vol) {
    write_tensor(header, {vol.shape, "volume", DType::F64, {{"voxel_size", vol.voxel_size}},
                          vol.data});
}

VolumeImage read_volume(const fs::path& header) {
    Tensor t = read_tensor(header);
    require(t.tag == "volume", header.string() + " is not a volume (tag '" + t.tag + "')");
    VolumeImage vol(t.shape, t.meta.value("voxel_size", 1.0));
    vol.data = std::move(t.data);
    return vol;
}

void write_stack(const fs::path& header, const ProjectionStack& stack) {
    write_tensor(header, {stack.shape, "projections", DType::F64, json::object(), stack.data});
}

ProjectionStack read_stack(const fs::path& header) {
    Tensor t = read_tensor(header);
    require(t.tag == "projections",
            header.string() + " is not a projection stack (tag '" + t.tag + "')");
    ProjectionStack stack(t.shape);
    stack.data = std::move(t.data);
    return stack;
}

void write_params(const fs::path& manifest, const FilterParams& p) {
    require_json_path(manifest);
    const std::string stem = manifest.stem().string();
    const fs::path dir = manifest.parent_path();
    json m = {{"type", "filter_params"},
              {"kind", to_string(p.kind)},
              {"n_angles", p.n_angles},
              {"det_shape", p.det_shape},
              {"filter", stem + ".filter.json"},
              {"weight", nullptr}};
    write_tensor(dir / (stem + ".filter.json"),
                 {p.filter_shape(), "filter", DType::F64, json::object(), p.filter});
    if (p.has_weights()) {
        m["weight"] = stem + ".weight.json";
        write_tensor(dir / (stem + ".weight.json"),
                     {p.weight_shape(), "weight", DType::F64, json::object(), p.weight});
    }
    write_text(manifest, m.dump(2) + "\n");
}

FilterParams read_params(const fs::path& manifest) {
    const json m = parse_json_file(manifest);
    FilterParams p;
    try {
        require(m.at("type").get<std::string>() == "filter_params",
                manifest.string() + " is not a filter parameter file");
        p.kind = geometry_kind_from_string(m.at("kind").get<std::string>());
        p.n_angles = m.at("n_angles").get<std::size_t>();
        p.det_shape = shape_from_json(m.at("det_shape"));
        const fs::path dir = manifest.parent_path();
        Tensor f = read_tensor(dir / m.at("filter").get<std::string>());
        require(f.shape == p.filter_shape(), "filter tensor shape mismatch");
        p.filter = std::move(f.data);
        if (p.has_weights()) {
            require(!m.at("weight").is_null(), "weight tensor missing from " + manifest.string());
            Tensor w = read_tensor(dir / m.at("weight").get<std::string>());
            require(w.shape == p.weight_shape(), "weight tensor shape mismatch");
            p.weight = std::move(w.data);
        }
    } catch (const json::exception& e) {
        throw ValidationError("bad params manifest " + manifest.string() + ": " + e.what());
    }
    return p;
}

namespace {

std::string sample_name(char prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c_%04zu.json", prefix, i);
    return buf;
}

} // namespace

void write_dataset(const fs::path& dir, const Dataset& data) {
    require(data.x.size() == data.y.size(), "dataset x/y counts differ");
    fs::create_directories(dir);
    json samples = json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto xh = dir / sample_name('x', i), yh = dir / sample_name('y', i);
        write_volume(xh, data.x[i]);
        write_stack(yh, data.y[i]);
        samples.push_back({{"x", xh.filename().string()},
                           {"y", yh.filename().string()},
                           {"x_checksum", file_checksum(payload_path(xh))},
                           {"y_checksum", file_checksum(payload_path(yh))}});
    }
    json m = {{"type", "dataset"},
              {"count", data.size()},
              {"seed", data.seed},
              {"snr_db", std::isinf(data.snr_db) ? json("inf") : json(data.snr_db)},
              {"samples", samples}};
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
    const fs::path manifest = dir / "manifest.json";
    if (!fs::exists(manifest)) throw IoError("no dataset manifest in " + dir.string());
    const json m = parse_json_file(manifest);
    Dataset data;
    try {
        require(m.at("type").get<std::string>() == "dataset", "not a dataset manifest");
        data.seed = m.at("seed").get<std::uint64_t>();
        const json& snr = m.at("snr_db");
        data.snr_db = snr.is_string() ? kNoiseless : snr.get<double>();
        for (const auto& s : m.at("samples")) {
            const auto xh = dir / s.at("x").get<std::string>();
            const auto yh = dir / s.at("y").get<std::string>();
            if (file_checksum(payload_path(xh)) != s.at("x_checksum").get<std::string>() ||
                file_checksum(payload_path(yh)) != s.at("y_checksum").get<std::string>())
                throw IoError("checksum mismatch for sample in " + dir.string());
            data.x.push_back(read_volume(xh));
            data.y.push_back(read_stack(yh));
        }
        require(data.size() == m.at("count").get<std::size_t>(), "dataset count mismatch");
    } catch (const json::exception& e) {
        throw ValidationError("bad dataset manifest " + manifest.string() + ": " + e.what());
    }
    return data;
}

} // namespace learnfbp
