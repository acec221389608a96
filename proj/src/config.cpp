#include "learnfbp/config.hpp"

#include <cmath>
#include <set>

#include "learnfbp/errors.hpp"
#include "learnfbp/io.hpp"
#include "learnfbp/rng.hpp"

namespace learnfbp {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section, std::set<std::string> allowed) {
    require(j.is_object(), "section '" + section + "' must be an object");
    for (const auto& [key, _] : j.items())
        require(allowed.count(key) > 0, "unknown key '" + key + "' in section '" + section + "'");
}

template <class T> void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

json snr_to_json(double snr) { return std::isinf(snr) ? json("inf") : json(snr); }

double snr_from_json(const json& j) {
    if (j.is_null()) return kNoiseless;
    if (j.is_string()) {
        require(j.get<std::string>() == "inf", "snr_db must be a number, \"inf\" or null");
        return kNoiseless;
    }
    return j.get<double>();
}

json geometry_to_json(const GeometryParams& g) {
    return {{"kind", to_string(g.kind)},
            {"n_angles", g.n_angles},
            {"det_shape", g.det_shape},
            {"det_pixel_size", g.det_pixel_size},
            {"vol_shape", g.vol_shape},
            {"voxel_size", g.vol_voxel_size},
            {"sod", g.sod},
            {"sdd", g.sdd},
            {"sod_major", g.sod_major},
            {"sdd_major", g.sdd_major},
            {"tilt_deg", g.tilt_phi}};
}

GeometryParams geometry_from_json(const json& j) {
    check_keys(j, "geometry",
               {"kind", "n_angles", "det_shape", "det_pixel_size", "vol_shape", "voxel_size",
                "sod", "sdd", "sod_major", "sdd_major", "tilt_deg"});
    GeometryParams g;
    g.kind = geometry_kind_from_string(j.at("kind").get<std::string>());
    g.n_angles = j.at("n_angles").get<std::size_t>();
    g.det_shape = j.at("det_shape").get<Shape>();
    g.vol_shape = j.at("vol_shape").get<Shape>();
    read(j, "det_pixel_size", g.det_pixel_size);
    read(j, "voxel_size", g.vol_voxel_size);
    read(j, "sod", g.sod);
    read(j, "sdd", g.sdd);
    read(j, "sod_major", g.sod_major);
    read(j, "sdd_major", g.sdd_major);
    read(j, "tilt_deg", g.tilt_phi);
    return g;
}

json phantom_to_json(const PhantomSpec& p) {
    return {{"kind", to_string(p.kind)},       {"min_circles", p.min_circles},
            {"max_circles", p.max_circles},    {"min_radius", p.min_radius},
            {"max_radius", p.max_radius},      {"n_layers", p.n_layers},
            {"value", p.value}};
}

PhantomSpec phantom_from_json(const json& j) {
    check_keys(j, "phantom",
               {"kind", "min_circles", "max_circles", "min_radius", "max_radius", "n_layers",
                "value"});
    PhantomSpec p;
    p.kind = phantom_kind_from_string(j.at("kind").get<std::string>());
    read(j, "min_circles", p.min_circles);
    read(j, "max_circles", p.max_circles);
    read(j, "min_radius", p.min_radius);
    read(j, "max_radius", p.max_radius);
    read(j, "n_layers", p.n_layers);
    read(j, "value", p.value);
    return p;
}

json dataset_to_json(const DatasetConfig& d) {
    return {{"train_size", d.train_size},
            {"val_size", d.val_size},
            {"snr_db", snr_to_json(d.snr_db)},
            {"val_snr_db", d.val_snr_db ? snr_to_json(*d.val_snr_db) : json(nullptr)},
            {"seed", d.seed}};
}

DatasetConfig dataset_from_json(const json& j) {
    check_keys(j, "dataset", {"train_size", "val_size", "snr_db", "val_snr_db", "seed"});
    DatasetConfig d;
    read(j, "train_size", d.train_size);
    read(j, "val_size", d.val_size);
    if (j.contains("snr_db")) d.snr_db = snr_from_json(j.at("snr_db"));
    if (j.contains("val_snr_db") && !j.at("val_snr_db").is_null())
        d.val_snr_db = snr_from_json(j.at("val_snr_db"));
    read(j, "seed", d.seed);
    return d;
}

json train_to_json(const TrainConfig& t) {
    return {{"lambda", t.lambda},
            {"lr", t.lr},
            {"lr_weight", t.lr_weight ? json(*t.lr_weight) : json(nullptr)},
            {"n_iters", t.n_iters},
            {"batch_size", t.batch_size ? json(*t.batch_size) : json(nullptr)},
            {"seed", t.seed},
            {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"eps", t.adam.eps}}},
            {"init", to_string(t.init)}};
}

TrainConfig train_from_json(const json& j) {
    check_keys(j, "train",
               {"lambda", "lr", "lr_weight", "n_iters", "batch_size", "seed", "adam", "init"});
    TrainConfig t;
    read(j, "lambda", t.lambda);
    read(j, "lr", t.lr);
    if (j.contains("lr_weight") && !j.at("lr_weight").is_null())
        t.lr_weight = j.at("lr_weight").get<double>();
    read(j, "n_iters", t.n_iters);
    if (j.contains("batch_size") && !j.at("batch_size").is_null())
        t.batch_size = j.at("batch_size").get<std::size_t>();
    read(j, "seed", t.seed);
    if (j.contains("adam")) {
        const json& a = j.at("adam");
        check_keys(a, "train.adam", {"beta1", "beta2", "eps"});
        read(a, "beta1", t.adam.beta1);
        read(a, "beta2", t.adam.beta2);
        read(a, "eps", t.adam.eps);
    }
    if (j.contains("init")) t.init = filter_init_from_string(j.at("init").get<std::string>());
    return t;
}

json eval_to_json(const EvalConfig& e) {
    return {{"metrics", e.metrics},
            {"baselines", e.baselines},
            {"classical_filter", to_string(e.classical_filter)},
            {"nag_iters", e.nag_iters}};
}

EvalConfig eval_from_json(const json& j) {
    check_keys(j, "eval", {"metrics", "baselines", "classical_filter", "nag_iters"});
    EvalConfig e;
    read(j, "metrics", e.metrics);
    read(j, "baselines", e.baselines);
    if (j.contains("classical_filter"))
        e.classical_filter =
            classical_filter_from_string(j.at("classical_filter").get<std::string>());
    read(j, "nag_iters", e.nag_iters);
    return e;
}

} // namespace

void ExperimentConfig::validate() const {
    const Geometry geom = make_geometry(geometry);
    PhantomSpec spec = phantom;
    spec.shape = geom.vol_shape();
    spec.validate();
    require((phantom.kind == PhantomKind::Circles2D) == !geom.is_3d(),
            "phantom kind " + to_string(phantom.kind) + " does not match geometry " +
                to_string(geometry.kind));
    require(dataset.train_size >= 1, "dataset.train_size must be >= 1");
    require(!std::isnan(dataset.snr_db), "dataset.snr_db is NaN");
    train.validate(dataset.train_size);
    for (const auto& m : eval.metrics)
        require(m == "mse" || m == "ssim", "unknown metric '" + m + "'");
    for (const auto& b : eval.baselines)
        require(b == "classical" || b == "nag", "unknown baseline '" + b + "'");
    require(eval.nag_iters >= 1, "eval.nag_iters must be >= 1");
    require(!output_dir.empty(), "output_dir is empty");
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
    return to_json(*this) == to_json(other);
}

nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"geometry", geometry_to_json(c.geometry)},
            {"phantom", phantom_to_json(c.phantom)},
            {"dataset", dataset_to_json(c.dataset)},
            {"train", train_to_json(c.train)},
            {"eval", eval_to_json(c.eval)},
            {"output_dir", c.output_dir}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    try {
        check_keys(j, "config", {"geometry", "phantom", "dataset", "train", "eval", "output_dir"});
        ExperimentConfig c;
        c.geometry = geometry_from_json(j.at("geometry"));
        c.phantom = phantom_from_json(j.at("phantom"));
        if (j.contains("dataset")) c.dataset = dataset_from_json(j.at("dataset"));
        if (j.contains("train")) c.train = train_from_json(j.at("train"));
        if (j.contains("eval")) c.eval = eval_from_json(j.at("eval"));
        read(j, "output_dir", c.output_dir);
        c.phantom.seed = c.dataset.seed;
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("malformed config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

std::string dump_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

namespace {

Dataset make_split(const ExperimentConfig& c, const Geometry& geom, std::size_t count,
                   double snr, std::uint64_t seed) {
    PhantomSpec spec = c.phantom;
    spec.shape = geom.vol_shape();
    return make_dataset(geom, spec, count, snr, seed);
}

} // namespace

Dataset make_train_set(const ExperimentConfig& c, const Geometry& geom) {
    return make_split(c, geom, c.dataset.train_size, c.dataset.snr_db,
                      derive_seed(c.dataset.seed, 0, "train"));
}

Dataset make_val_set(const ExperimentConfig& c, const Geometry& geom) {
    return make_split(c, geom, c.dataset.val_size, c.dataset.val_snr_db.value_or(c.dataset.snr_db),
                      derive_seed(c.dataset.seed, 1, "validation"));
}

} // namespace learnfbp
