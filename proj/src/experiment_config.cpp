#include "restartlab/experiment_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace restartlab {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw config_error(path + ": " + msg);
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        const std::size_t upto = std::min(text.size(), static_cast<std::size_t>(e.byte));
        for (std::size_t i = 0; i < upto; ++i)
            if (text[i] == '\n') ++line;
        throw config_error("JSON parse error at line " + std::to_string(line) + ": " + e.what());
    }
}

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw config_error("cannot open file: " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const json& require_field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path, std::string("missing required field '") + key + "'");
    return *it;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) fail(path, "unknown field '" + it.key() + "'");
    }
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> as_number_array(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<int> as_int_array(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of integers");
    std::vector<int> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

// ---- canonicalization (structural validation + normalized key order) ----

json canonicalize_spectrum(const json& j, const std::string& path, bool allow_x0) {
    json out = json::object();
    const bool direct = j.is_object() && j.contains("sigmas");
    const bool derived = j.is_object() && j.contains("lambdas");
    if (direct == derived) fail(path, "spectrum needs exactly one of 'sigmas' or 'lambdas'");
    std::size_t n = 0;
    if (direct) {
        reject_unknown_keys(j, {"sigmas", "weights", "x0"}, path);
        const auto sigmas = as_number_array(require_field(j, "sigmas", path), path + ".sigmas");
        n = sigmas.size();
        out["sigmas"] = sigmas;
    } else {
        reject_unknown_keys(j, {"eta", "steps", "lambdas", "weights", "x0"}, path);
        out["eta"] = as_number(require_field(j, "eta", path), path + ".eta");
        out["steps"] = as_int(require_field(j, "steps", path), path + ".steps");
        const auto lambdas = as_number_array(require_field(j, "lambdas", path), path + ".lambdas");
        n = lambdas.size();
        out["lambdas"] = lambdas;
    }
    if (j.contains("weights")) {
        const auto weights = as_number_array(j["weights"], path + ".weights");
        if (weights.size() != n) fail(path + ".weights", "length must match the mode count");
        out["weights"] = weights;
    } else {
        out["weights"] = std::vector<double>(n, 1.0);
    }
    if (j.contains("x0")) {
        if (!allow_x0) fail(path + ".x0", "initial residuals are not accepted here");
        const auto x0 = as_number_array(j["x0"], path + ".x0");
        if (x0.size() != n) fail(path + ".x0", "length must match the mode count");
        out["x0"] = x0;
    }
    return out;
}

json canonicalize_schedule(const json& j, const std::string& path) {
    const std::string variant = as_string(require_field(j, "variant", path), path + ".variant");
    json out = json::object();
    out["variant"] = variant;
    if (variant == "none") {
        reject_unknown_keys(j, {"variant"}, path);
    } else if (variant == "global") {
        reject_unknown_keys(j, {"variant", "period"}, path);
        out["period"] = as_int(require_field(j, "period", path), path + ".period");
    } else if (variant == "per_mode") {
        reject_unknown_keys(j, {"variant", "periods"}, path);
        out["periods"] = as_int_array(require_field(j, "periods", path), path + ".periods");
    } else if (variant == "blockwise") {
        reject_unknown_keys(j, {"variant", "periods"}, path);
        if (j.contains("periods")) out["periods"] = as_int_array(j["periods"], path + ".periods");
    } else if (variant == "soft") {
        reject_unknown_keys(j, {"variant", "period", "retain_alpha", "inject_beta"}, path);
        out["period"] = as_int(require_field(j, "period", path), path + ".period");
        out["retain_alpha"] =
            as_number(require_field(j, "retain_alpha", path), path + ".retain_alpha");
        out["inject_beta"] =
            as_number(require_field(j, "inject_beta", path), path + ".inject_beta");
    } else {
        fail(path + ".variant", "unknown schedule variant '" + variant + "'");
    }
    return out;
}

json canonicalize_optimizer(const json& j, const std::string& path) {
    reject_unknown_keys(j, {"kind", "nu", "beta_out"}, path);
    json out = json::object();
    const std::string kind = as_string(require_field(j, "kind", path), path + ".kind");
    if (kind != "hb" && kind != "nag") fail(path + ".kind", "expected 'hb' or 'nag'");
    out["kind"] = kind;
    out["nu"] = as_number(require_field(j, "nu", path), path + ".nu");
    out["beta_out"] = as_number(require_field(j, "beta_out", path), path + ".beta_out");
    return out;
}

json canonicalize_block(const json& j, const std::string& path) {
    reject_unknown_keys(j, {"label", "spectrum", "nu", "beta_out", "period"}, path);
    json out = json::object();
    out["label"] = as_string(require_field(j, "label", path), path + ".label");
    out["spectrum"] =
        canonicalize_spectrum(require_field(j, "spectrum", path), path + ".spectrum", false);
    if (j.contains("nu") != j.contains("beta_out"))
        fail(path, "per-block hyperparameters need both 'nu' and 'beta_out'");
    if (j.contains("nu")) {
        out["nu"] = as_number(j["nu"], path + ".nu");
        out["beta_out"] = as_number(j["beta_out"], path + ".beta_out");
    }
    if (j.contains("period")) out["period"] = as_int(j["period"], path + ".period");
    return out;
}

json canonicalize_model(const json& j, const std::string& path) {
    reject_unknown_keys(j, {"spectrum", "blocks", "quadratic"}, path);
    const int sections = static_cast<int>(j.contains("spectrum")) +
                         static_cast<int>(j.contains("blocks")) +
                         static_cast<int>(j.contains("quadratic"));
    if (sections != 1)
        fail(path, "exactly one of 'spectrum', 'blocks' or 'quadratic' is required");
    json out = json::object();
    if (j.contains("spectrum")) {
        out["spectrum"] = canonicalize_spectrum(j["spectrum"], path + ".spectrum", true);
    } else if (j.contains("blocks")) {
        const json& blocks = j["blocks"];
        if (!blocks.is_array() || blocks.empty())
            fail(path + ".blocks", "expected a nonempty array of blocks");
        json arr = json::array();
        for (std::size_t i = 0; i < blocks.size(); ++i)
            arr.push_back(canonicalize_block(blocks[i], path + ".blocks[" + std::to_string(i) + "]"));
        out["blocks"] = arr;
    } else {
        const json& q = j["quadratic"];
        const std::string qpath = path + ".quadratic";
        reject_unknown_keys(q, {"matrix_file", "eta", "steps", "workers", "x0",
                                "worker_matrix_files"}, qpath);
        json qq = json::object();
        qq["matrix_file"] = as_string(require_field(q, "matrix_file", qpath), qpath + ".matrix_file");
        qq["eta"] = as_number(require_field(q, "eta", qpath), qpath + ".eta");
        qq["steps"] = as_int(require_field(q, "steps", qpath), qpath + ".steps");
        qq["workers"] = q.contains("workers") ? as_int(q["workers"], qpath + ".workers") : 1;
        if (q.contains("x0")) qq["x0"] = as_number_array(q["x0"], qpath + ".x0");
        if (q.contains("worker_matrix_files")) {
            const json& files = q["worker_matrix_files"];
            if (!files.is_array() || files.empty())
                fail(qpath + ".worker_matrix_files", "expected a nonempty array of paths");
            json arr = json::array();
            for (std::size_t i = 0; i < files.size(); ++i)
                arr.push_back(as_string(files[i], qpath + ".worker_matrix_files[" +
                                                      std::to_string(i) + "]"));
            qq["worker_matrix_files"] = arr;
        }
        out["quadratic"] = qq;
    }
    return out;
}

json canonicalize_experiment(const json& j) {
    reject_unknown_keys(j, {"model", "optimizer", "schedule", "horizon", "output"}, "config");
    json out = json::object();
    out["model"] = canonicalize_model(require_field(j, "model", "config"), "model");
    out["optimizer"] = canonicalize_optimizer(require_field(j, "optimizer", "config"), "optimizer");
    out["schedule"] = canonicalize_schedule(require_field(j, "schedule", "config"), "schedule");
    out["horizon"] = as_int(require_field(j, "horizon", "config"), "horizon");
    out["output"] = j.contains("output") ? as_string(j["output"], "output")
                                         : std::string("trajectory.csv");
    return out;
}

json canonicalize_sweep(const json& j) {
    reject_unknown_keys(j, {"beta_grid", "nu_grid", "k_grid", "kinds", "model", "horizon",
                            "loss_clip", "best_k_reduction", "output"}, "config");
    json out = json::object();
    out["beta_grid"] = as_number_array(require_field(j, "beta_grid", "config"), "beta_grid");
    out["nu_grid"] = as_number_array(require_field(j, "nu_grid", "config"), "nu_grid");
    out["k_grid"] = as_int_array(require_field(j, "k_grid", "config"), "k_grid");
    const json& kinds = require_field(j, "kinds", "config");
    if (!kinds.is_array() || kinds.empty()) fail("kinds", "expected a nonempty array");
    json karr = json::array();
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const std::string k = as_string(kinds[i], "kinds[" + std::to_string(i) + "]");
        if (k != "hb" && k != "nag") fail("kinds", "expected 'hb' or 'nag'");
        karr.push_back(k);
    }
    out["kinds"] = karr;
    const json& model = require_field(j, "model", "config");
    reject_unknown_keys(model, {"spectrum", "blocks"}, "model");
    if (model.contains("spectrum") == model.contains("blocks"))
        fail("model", "exactly one of 'spectrum' or 'blocks' is required");
    json m = json::object();
    if (model.contains("spectrum")) {
        m["spectrum"] = canonicalize_spectrum(model["spectrum"], "model.spectrum", false);
    } else {
        const json& blocks = model["blocks"];
        if (!blocks.is_array() || blocks.empty())
            fail("model.blocks", "expected a nonempty array of blocks");
        json arr = json::array();
        for (std::size_t i = 0; i < blocks.size(); ++i)
            arr.push_back(canonicalize_block(blocks[i], "model.blocks[" + std::to_string(i) + "]"));
        m["blocks"] = arr;
    }
    out["model"] = m;
    out["horizon"] = as_int(require_field(j, "horizon", "config"), "horizon");
    if (j.contains("loss_clip")) {
        const json& clip = j["loss_clip"];
        if (!clip.is_array() || clip.size() != 2) fail("loss_clip", "expected [lo, hi]");
        out["loss_clip"] = {as_number(clip[0], "loss_clip[0]"), as_number(clip[1], "loss_clip[1]")};
    } else {
        out["loss_clip"] = {-12.0, 2.0};
    }
    out["best_k_reduction"] = j.contains("best_k_reduction")
                                  ? as_bool(j["best_k_reduction"], "best_k_reduction")
                                  : false;
    out["output"] = j.contains("output") ? as_string(j["output"], "output")
                                         : std::string("sweep.csv");
    return out;
}

// ---- building runtime objects from canonical json ----

struct SpectrumParts {
    Spectrum spectrum;
    std::vector<double> x0;
};

SpectrumParts build_spectrum(const json& j) {
    std::vector<double> weights = j["weights"].get<std::vector<double>>();
    std::vector<double> x0;
    if (j.contains("x0")) x0 = j["x0"].get<std::vector<double>>();
    if (j.contains("sigmas"))
        return {Spectrum::direct(j["sigmas"].get<std::vector<double>>(), std::move(weights)),
                std::move(x0)};
    const InnerConfig inner(j["eta"].get<double>(), j["steps"].get<int>());
    return {Spectrum::derived(inner, j["lambdas"].get<std::vector<double>>(), std::move(weights)),
            std::move(x0)};
}

std::vector<Block> build_blocks(const json& arr) {
    std::vector<Block> blocks;
    blocks.reserve(arr.size());
    for (const json& bj : arr) {
        Block b{bj["label"].get<std::string>(), build_spectrum(bj["spectrum"]).spectrum, {}, {}};
        if (bj.contains("nu"))
            b.hyper = OuterHyperparams(bj["nu"].get<double>(), bj["beta_out"].get<double>());
        if (bj.contains("period")) b.period = bj["period"].get<int>();
        blocks.push_back(std::move(b));
    }
    return blocks;
}

RestartSchedule build_schedule(const json& j, const std::vector<Block>* blocks) {
    const std::string variant = j["variant"].get<std::string>();
    if (variant == "none") return RestartSchedule::none();
    if (variant == "global") return RestartSchedule::global(j["period"].get<int>());
    if (variant == "per_mode")
        return RestartSchedule::per_mode(j["periods"].get<std::vector<int>>());
    if (variant == "blockwise") {
        if (j.contains("periods"))
            return RestartSchedule::blockwise(j["periods"].get<std::vector<int>>());
        if (!blocks)
            throw config_error("schedule: blockwise without periods requires a blocks model");
        return blockwise_schedule_from(*blocks);
    }
    return RestartSchedule::soft(j["period"].get<int>(), j["retain_alpha"].get<double>(),
                                 j["inject_beta"].get<double>());
}

}  // namespace

TransitionKind parse_kind(const std::string& name) {
    if (name == "hb") return TransitionKind::HB;
    if (name == "nag") return TransitionKind::NAG;
    throw config_error("optimizer kind must be 'hb' or 'nag', got '" + name + "'");
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw config_error("cannot open matrix file: " + file.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw config_error(file.string() + ": cannot parse '" + cell + "' as a number");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw config_error(file.string() + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw config_error(file.string() + ": empty matrix");
    if (rows.size() != rows.front().size())
        throw config_error(file.string() + ": matrix must be square (n rows x n columns)");
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            if (!std::isfinite(v)) throw config_error(file.string() + ": non-finite entry");
            m(i, k) = v;
        }
    return m;
}

SimulationSetup parse_experiment_config(const std::string& json_text,
                                        const std::filesystem::path& base_dir) {
    const json canon = canonicalize_experiment(parse_json_text(json_text));

    const json& opt = canon["optimizer"];
    const OuterHyperparams hyper(opt["nu"].get<double>(), opt["beta_out"].get<double>());
    const TransitionKind kind = parse_kind(opt["kind"].get<std::string>());
    const int horizon = canon["horizon"].get<int>();
    if (horizon < 0) throw config_error("horizon: must be >= 0");

    const json& model = canon["model"];
    std::variant<Spectrum, std::vector<Block>, QuadraticProblem> m = std::vector<Block>{};
    std::optional<InnerConfig> inner;
    std::vector<double> x0;
    const std::vector<Block>* blocks_ptr = nullptr;

    if (model.contains("spectrum")) {
        SpectrumParts parts = build_spectrum(model["spectrum"]);
        x0 = std::move(parts.x0);
        m = std::move(parts.spectrum);
    } else if (model.contains("blocks")) {
        m = build_blocks(model["blocks"]);
        blocks_ptr = &std::get<std::vector<Block>>(m);
    } else {
        const json& q = model["quadratic"];
        inner = InnerConfig(q["eta"].get<double>(), q["steps"].get<int>());
        QuadraticProblem problem;
        problem.hessian = read_matrix_csv(base_dir / q["matrix_file"].get<std::string>());
        problem.workers = q["workers"].get<int>();
        if (q.contains("x0")) {
            const auto v = q["x0"].get<std::vector<double>>();
            problem.x0 = Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                           static_cast<Eigen::Index>(v.size()));
        } else {
            problem.x0 = Eigen::VectorXd::Ones(problem.hessian.rows());
        }
        if (q.contains("worker_matrix_files"))
            for (const json& f : q["worker_matrix_files"])
                problem.worker_hessians.push_back(read_matrix_csv(base_dir / f.get<std::string>()));
        m = std::move(problem);
    }

    RestartSchedule schedule = build_schedule(canon["schedule"], blocks_ptr);
    return SimulationSetup{std::move(m), inner,   hyper, kind, std::move(schedule),
                           horizon,     canon["output"].get<std::string>(), std::move(x0)};
}

SimulationSetup load_experiment_config(const std::filesystem::path& file) {
    return parse_experiment_config(read_text_file(file), file.parent_path());
}

SweepRunSetup parse_sweep_config(const std::string& json_text) {
    const json canon = canonicalize_sweep(parse_json_text(json_text));

    SweepConfig cfg;
    cfg.beta_grid = canon["beta_grid"].get<std::vector<double>>();
    cfg.nu_grid = canon["nu_grid"].get<std::vector<double>>();
    cfg.k_grid = canon["k_grid"].get<std::vector<int>>();
    for (const json& k : canon["kinds"]) cfg.kinds.push_back(parse_kind(k.get<std::string>()));
    const json& model = canon["model"];
    if (model.contains("spectrum"))
        cfg.model = build_spectrum(model["spectrum"]).spectrum;
    else
        cfg.model = build_blocks(model["blocks"]);
    cfg.horizon = canon["horizon"].get<int>();
    cfg.clip_lo = canon["loss_clip"][0].get<double>();
    cfg.clip_hi = canon["loss_clip"][1].get<double>();
    cfg.best_k_reduction = canon["best_k_reduction"].get<bool>();
    return SweepRunSetup{std::move(cfg), canon["output"].get<std::string>()};
}

SweepRunSetup load_sweep_config(const std::filesystem::path& file) {
    return parse_sweep_config(read_text_file(file));
}

std::string canonical_experiment_config(const std::string& json_text) {
    return canonicalize_experiment(parse_json_text(json_text)).dump(2) + "\n";
}

std::string canonical_sweep_config(const std::string& json_text) {
    return canonicalize_sweep(parse_json_text(json_text)).dump(2) + "\n";
}

Spectrum load_spectrum_file(const std::filesystem::path& file) {
    const json canon =
        canonicalize_spectrum(parse_json_text(read_text_file(file)), "spectrum", false);
    return build_spectrum(canon).spectrum;
}

}  // namespace restartlab
