#include "sdc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace sdc {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
    std::string out = "invalid config:";
    for (const auto& i : issues) out += "\n  " + i;
    return out;
}

template <class T>
const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "boolean";
    else if constexpr (std::is_integral_v<T>) return "integer";
    else if constexpr (std::is_floating_point_v<T>) return "number";
    else return "string";
}

// Reads fields out of a JSON tree, recording every problem instead of
// stopping at the first.
class Reader {
public:
    Reader(const json& root, std::vector<std::string>& issues) : issues_(issues) { stack_.push_back({&root, ""}); }

    template <class F>
    void section(const std::string& key, F&& body) {
        const json* obj = current();
        const std::string path = join(key);
        seen_.back().insert(key);
        if (!obj->contains(key)) return;
        const json& sub = obj->at(key);
        if (!sub.is_object()) {
            issues_.push_back(path + ": expected an object");
            return;
        }
        stack_.push_back({&sub, path});
        seen_.emplace_back();
        body();
        report_unknown();
        seen_.pop_back();
        stack_.pop_back();
    }

    template <class T>
    void field(const std::string& key, T& out) {
        seen_.back().insert(key);
        const json* obj = current();
        if (!obj->contains(key)) return;
        read_value(obj->at(key), join(key), out);
    }

    void scheme(const std::string& key, Scheme& out) {
        std::string s = to_string(out);
        field(key, s);
        try {
            out = scheme_from_string(s);
        } catch (const Error&) {
            issues_.push_back(join(key) + ": unknown scheme '" + s + "' (backward-euler or trapezoidal)");
        }
    }

    void finish() { report_unknown(); }

private:
    struct Frame {
        const json* node;
        std::string path;
    };

    const json* current() const { return stack_.back().node; }
    std::string join(const std::string& key) const {
        return stack_.back().path.empty() ? key : stack_.back().path + "." + key;
    }

    void report_unknown() {
        for (auto it = current()->begin(); it != current()->end(); ++it)
            if (!seen_.back().count(it.key())) issues_.push_back(join(it.key()) + ": unknown key");
    }

    template <class T>
    void read_value(const json& v, const std::string& path, T& out) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) return mismatch(path, v, "boolean");
            out = v.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) return mismatch(path, v, "integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned() || v.get<long long>() >= 0) out = v.get<T>();
                else issues_.push_back(path + ": must be non-negative");
            } else {
                out = v.get<T>();
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) return mismatch(path, v, "number");
            out = v.get<double>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) return mismatch(path, v, "string");
            out = v.get<std::string>();
        } else {
            using E = typename T::value_type;
            if constexpr (std::is_same_v<T, std::array<double, kMaxDim>>) {
                if (!v.is_array() || v.size() > kMaxDim) return mismatch(path, v, "array of up to 3 numbers");
                for (std::size_t k = 0; k < v.size(); ++k) read_value(v[k], path + "[" + std::to_string(k) + "]", out[k]);
            } else {
                if (!v.is_array()) return mismatch(path, v, std::string("array of ") + type_name<E>() + "s");
                T result(v.size());
                for (std::size_t k = 0; k < v.size(); ++k) {
                    E e{};
                    read_value(v[k], path + "[" + std::to_string(k) + "]", e);
                    result[k] = e;
                }
                out = std::move(result);
            }
        }
    }

    void mismatch(const std::string& path, const json& v, const std::string& expected) {
        issues_.push_back(path + ": expected " + expected + ", got " + std::string(v.type_name()));
    }

    std::vector<std::string>& issues_;
    std::vector<Frame> stack_;
    std::vector<std::set<std::string>> seen_{1};
};

class Writer {
public:
    explicit Writer(json& root) { stack_.push_back(&root); }

    template <class F>
    void section(const std::string& key, F&& body) {
        json& sub = (*stack_.back())[key] = json::object();
        stack_.push_back(&sub);
        body();
        stack_.pop_back();
    }

    template <class T>
    void field(const std::string& key, const T& v) {
        (*stack_.back())[key] = v;
    }

    void scheme(const std::string& key, Scheme s) { (*stack_.back())[key] = to_string(s); }

private:
    std::vector<json*> stack_;
};

// The schema, shared by reading and writing.
template <class V, class C>
void visit(V& v, C& c) {
    v.field("seed", c.seed);
    v.field("workers", c.workers);
    v.field("dim", c.dim);
    v.field("T", c.T);
    v.field("M", c.M);
    v.scheme("scheme", c.scheme);
    v.section("weight", [&] {
        v.field("lambda", c.weight.lambda);
        v.field("K", c.weight.K);
        v.field("tau", c.weight.tau);
        v.field("delta", c.weight.delta);
        v.field("epsilon", c.weight.epsilon);
        v.field("tau0", c.weight.tau0);
        v.field("c0", c.weight.c0);
        v.field("x0", c.weight.x0);
        v.field("vartheta", c.weight.vartheta);
        v.field("margin", c.weight.margin);
    });
    v.section("omega", [&] {
        v.field("lo", c.omega_lo);
        v.field("hi", c.omega_hi);
    });
    v.section("omega0", [&] {
        v.field("lo", c.omega0_lo);
        v.field("hi", c.omega0_hi);
    });
    v.section("problem", [&] {
        v.field("time_dependent", c.problem.time_dependent);
        v.field("zero_initial", c.problem.zero_initial);
        v.field("b_max", c.problem.b_max);
        v.field("c_max", c.problem.c_max);
    });
    v.section("verify_ops", [&] {
        v.field("fields", c.verify_ops.fields);
        v.field("dims", c.verify_ops.dims);
        v.field("n_min", c.verify_ops.n_min);
        v.field("n_max", c.verify_ops.n_max);
        v.field("tolerance", c.verify_ops.tolerance);
    });
    v.section("converge", [&] {
        v.field("grids", c.converge.grids);
        v.field("space_M", c.converge.space_M);
        v.field("time_grid", c.converge.time_grid);
        v.field("time_steps", c.converge.time_steps);
        v.field("discrete_M", c.converge.discrete_M);
        v.field("discrete_tolerance", c.converge.discrete_tolerance);
        v.field("min_order", c.converge.min_order);
    });
    v.section("energy", [&] {
        v.field("runs", c.energy.runs);
        v.field("grids", c.energy.grids);
        v.field("dims", c.energy.dims);
        v.field("M", c.energy.M);
    });
    v.section("weights", [&] {
        v.field("deltas", c.weights.deltas);
        v.field("taus", c.weights.taus);
        v.field("time_samples", c.weights.time_samples);
        v.field("slope_tolerance", c.weights.slope_tolerance);
    });
    v.section("carleman", [&] {
        v.field("runs", c.carleman.runs);
        v.field("grids", c.carleman.grids);
        v.field("max_spread", c.carleman.max_spread);
        v.field("map_grids", c.carleman.map_grids);
        v.field("taus", c.carleman.taus);
        v.field("deltas", c.carleman.deltas);
        v.field("tau1", c.carleman.tau1);
        v.field("eps0", c.carleman.eps0);
    });
    v.section("stability", [&] {
        v.field("runs", c.stability.runs);
        v.field("grids", c.stability.grids);
        v.field("decay_grids", c.stability.decay_grids);
        v.field("tau1", c.stability.tau1);
        v.field("eps0", c.stability.eps0);
        v.field("max_spread", c.stability.max_spread);
        v.field("slope_tolerance", c.stability.slope_tolerance);
    });
    v.section("reconstruct", [&] {
        v.field("grid", c.reconstruct.grid);
        v.field("M", c.reconstruct.M);
        v.field("beta", c.reconstruct.beta);
        v.field("tolerance", c.reconstruct.tolerance);
        v.field("noise", c.reconstruct.noise);
        v.field("betas", c.reconstruct.betas);
        v.field("coefficient_grid", c.reconstruct.coefficient_grid);
        v.field("coefficient_M", c.reconstruct.coefficient_M);
        v.field("coefficient_tolerance", c.reconstruct.coefficient_tolerance);
    });
}

void apply_override(json& root, const std::string& spec, std::vector<std::string>& issues) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        issues.push_back("--set " + spec + ": expected key=value");
        return;
    }
    const std::string key = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        json& next = (*node)[part];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) {
            issues.push_back("--set " + key + ": " + key.substr(0, dot) + " is not a section");
            return;
        }
        node = &next;
        start = dot + 1;
    }
}

void require(std::vector<std::string>& issues, bool ok, const std::string& path, const std::string& what) {
    if (!ok) issues.push_back(path + ": " + what);
}

void require_grids(std::vector<std::string>& issues, const std::vector<int>& grids, const std::string& path,
                   std::size_t min_count) {
    require(issues, grids.size() >= min_count, path, "needs at least " + std::to_string(min_count) + " entries");
    for (int g : grids) require(issues, g >= 2, path, "grid 1/h must be >= 2");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues) : Error(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> is;
    require(is, c.workers >= 1, "workers", "must be >= 1");
    require(is, c.dim >= 1 && c.dim <= kMaxDim, "dim", "must be 1, 2 or 3");
    require(is, c.T > 0, "T", "must be positive");
    require(is, c.M >= 2, "M", "must be >= 2");
    require(is, c.weight.lambda >= 1, "weight.lambda", "must be >= 1");
    require(is, c.weight.tau >= 1, "weight.tau", "must be >= 1");
    require(is, c.weight.delta > 0 && c.weight.delta <= 0.5, "weight.delta", "must lie in (0, 1/2]");
    require(is, c.weight.epsilon > 0, "weight.epsilon", "must be positive");
    require(is, c.weight.tau0 > 0, "weight.tau0", "must be positive");
    require(is, c.weight.c0 > 0, "weight.c0", "must be positive");
    require(is, c.weight.vartheta < c.T, "weight.vartheta", "must lie before T");
    require(is, 0 < c.omega_lo && c.omega_lo < c.omega_hi && c.omega_hi < 1, "omega", "needs 0 < lo < hi < 1");
    require(is, c.omega_lo < c.omega0_lo && c.omega0_lo < c.omega0_hi && c.omega0_hi < c.omega_hi, "omega0",
            "must lie strictly inside omega");
    require(is, c.problem.b_max >= 0, "problem.b_max", "must be non-negative");
    require(is, c.problem.c_max >= 0, "problem.c_max", "must be non-negative");

    require(is, c.verify_ops.fields >= 1, "verify_ops.fields", "must be >= 1");
    require(is, !c.verify_ops.dims.empty(), "verify_ops.dims", "must not be empty");
    for (int d : c.verify_ops.dims) require(is, d >= 1 && d <= kMaxDim, "verify_ops.dims", "entries must be 1, 2 or 3");
    require(is, 1 <= c.verify_ops.n_min && c.verify_ops.n_min <= c.verify_ops.n_max, "verify_ops.n_min",
            "needs 1 <= n_min <= n_max");

    require_grids(is, c.converge.grids, "converge.grids", 2);
    require(is, c.converge.space_M >= 2, "converge.space_M", "must be >= 2");
    require(is, c.converge.time_grid >= 2, "converge.time_grid", "must be >= 2");
    require(is, c.converge.time_steps.size() >= 2, "converge.time_steps", "needs at least 2 entries");
    for (int m : c.converge.time_steps) require(is, m >= 2, "converge.time_steps", "entries must be >= 2");
    require(is, c.converge.discrete_M >= 2, "converge.discrete_M", "must be >= 2");

    require(is, c.energy.runs >= 1, "energy.runs", "must be >= 1");
    require_grids(is, c.energy.grids, "energy.grids", 1);
    require(is, !c.energy.dims.empty(), "energy.dims", "must not be empty");
    for (int d : c.energy.dims) require(is, d >= 1 && d <= kMaxDim, "energy.dims", "entries must be 1, 2 or 3");
    require(is, c.energy.M >= 2, "energy.M", "must be >= 2");

    require(is, !c.weights.deltas.empty(), "weights.deltas", "must not be empty");
    for (double d : c.weights.deltas) require(is, d > 0 && d <= 0.5, "weights.deltas", "entries must lie in (0, 1/2]");
    require(is, c.weights.taus.size() >= 2, "weights.taus", "needs at least 2 entries");
    for (double t : c.weights.taus) require(is, t >= 1, "weights.taus", "entries must be >= 1");
    require(is, c.weights.time_samples >= 2, "weights.time_samples", "must be >= 2");

    require(is, c.carleman.runs >= 1, "carleman.runs", "must be >= 1");
    require_grids(is, c.carleman.grids, "carleman.grids", 1);
    require_grids(is, c.carleman.map_grids, "carleman.map_grids", 1);
    for (double t : c.carleman.taus) require(is, t >= 1, "carleman.taus", "entries must be >= 1");
    for (double d : c.carleman.deltas) require(is, d > 0 && d <= 0.5, "carleman.deltas", "entries must lie in (0, 1/2]");
    require(is, c.carleman.tau1 > 0 && c.carleman.eps0 > 0, "carleman.tau1", "tau1 and eps0 must be positive");

    require(is, c.stability.runs >= 1, "stability.runs", "must be >= 1");
    require_grids(is, c.stability.grids, "stability.grids", 1);
    require_grids(is, c.stability.decay_grids, "stability.decay_grids", 2);
    require(is, c.stability.tau1 > 0 && c.stability.eps0 > 0, "stability.tau1", "tau1 and eps0 must be positive");

    require(is, c.reconstruct.grid >= 2, "reconstruct.grid", "grid 1/h must be >= 2");
    require(is, c.reconstruct.M >= 2, "reconstruct.M", "must be >= 2");
    require(is, c.reconstruct.beta >= 0, "reconstruct.beta", "must be non-negative");
    for (double b : c.reconstruct.betas) require(is, b >= 0, "reconstruct.betas", "entries must be non-negative");
    require(is, c.reconstruct.noise >= 0, "reconstruct.noise", "must be non-negative");
    require(is, c.reconstruct.coefficient_grid >= 2, "reconstruct.coefficient_grid", "grid 1/h must be >= 2");
    require(is, c.reconstruct.coefficient_M >= 2, "reconstruct.coefficient_M", "must be >= 2");
    return is;
}

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
    std::vector<std::string> issues;
    json root = json::parse(text.begin(), text.end(), nullptr, false, true);
    if (root.is_discarded()) throw ConfigError({"<file>: not valid JSON"});
    if (!root.is_object()) throw ConfigError({"<file>: top level must be an object"});
    for (const auto& o : overrides) apply_override(root, o, issues);

    ExperimentConfig cfg;
    Reader reader(root, issues);
    visit(reader, cfg);
    reader.finish();
    if (issues.empty()) issues = validate_config(cfg);
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json root = json::object();
    Writer writer(root);
    ExperimentConfig copy = cfg;
    visit(writer, copy);
    return root.dump(2) + "\n";
}

}  // namespace sdc
