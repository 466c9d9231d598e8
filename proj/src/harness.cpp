#include "krlab/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "krlab/data.hpp"
#include "krlab/interpolators.hpp"
#include "krlab/kr.hpp"
#include "krlab/rng.hpp"
#include "krlab/spectra.hpp"
#include "krlab/stats.hpp"
#include "krlab/synthetic.hpp"

namespace krlab::harness {

using nlohmann::json;

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::MSE: return "mse";
        case Metric::ExcessMSE: return "excess_mse";
        case Metric::ClassificationError: return "classification_error";
        case Metric::NoisyClassificationError: return "noisy_classification_error";
    }
    return "unknown";
}

Metric metric_from_name(const std::string& s) {
    if (s == "mse") return Metric::MSE;
    if (s == "excess_mse") return Metric::ExcessMSE;
    if (s == "classification_error") return Metric::ClassificationError;
    if (s == "noisy_classification_error") return Metric::NoisyClassificationError;
    throw ConfigError("unknown metric name: " + s);
}

bool metric_is_classification(Metric m) {
    return m == Metric::ClassificationError || m == Metric::NoisyClassificationError;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("bad numeric field in CSV: '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("bad integer field in CSV: '" + s + "'");
    return v;
}

void check_csv_safe(const std::string& s) {
    if (s.find_first_of(",\n\r\"") != std::string::npos)
        throw ConfigError("identifier not CSV-safe: " + s);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

constexpr const char* kCsvHeader =
    "experiment_id,method,n,noise_kind,noise_level,seed,metric,risk,condition,wall_ms";

}  // namespace

void sort_records(std::vector<CurveRecord>& records) {
    auto key = [](const CurveRecord& r) {
        return std::tuple<const std::string&, const std::string&, int, const std::string&, double,
                          std::size_t, std::uint64_t>(r.experiment_id, r.method,
                                                      static_cast<int>(r.metric), r.noise_kind,
                                                      r.noise_level, r.n, r.seed);
    };
    std::stable_sort(records.begin(), records.end(),
                     [&](const CurveRecord& a, const CurveRecord& b) { return key(a) < key(b); });
}

std::string to_csv(const std::vector<CurveRecord>& records) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        check_csv_safe(r.experiment_id);
        check_csv_safe(r.method);
        check_csv_safe(r.noise_kind);
        double risk = r.error.empty() ? r.risk : std::numeric_limits<double>::quiet_NaN();
        out += r.experiment_id;
        out += ',';
        out += r.method;
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += r.noise_kind;
        out += ',';
        out += fmt(r.noise_level);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += metric_name(r.metric);
        out += ',';
        out += fmt(risk);
        out += ',';
        out += fmt(r.condition);
        out += ',';
        out += fmt(r.wall_ms);
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<CurveRecord>& records) {
    std::ofstream f(path, std::ios::binary);  // binary: no newline translation anywhere
    if (!f) throw ConfigError("cannot open for writing: " + path);
    f << to_csv(records);
    if (!f) throw ConfigError("write failed: " + path);
}

std::vector<CurveRecord> read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("empty CSV: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw ConfigError("unexpected CSV header in " + path);

    std::vector<CurveRecord> out;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.emplace_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 10) throw ConfigError("bad CSV row (want 10 fields): " + line);
        CurveRecord r;
        r.experiment_id = fields[0];
        r.method = fields[1];
        r.n = static_cast<std::size_t>(parse_u64(fields[2]));
        r.noise_kind = fields[3];
        r.noise_level = parse_double(fields[4]);
        r.seed = parse_u64(fields[5]);
        r.metric = metric_from_name(fields[6]);
        r.risk = parse_double(fields[7]);
        r.condition = parse_double(fields[8]);
        r.wall_ms = parse_double(fields[9]);
        if (std::isnan(r.risk)) r.error = "recorded failure";
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------

const ProfileCell& NoiseProfile::cell(double noise, std::size_t n) const {
    for (const auto& c : cells)
        if (c.noise_level == noise && c.n == n) return c;
    throw IncompleteGrid("no cell at noise=" + fmt(noise) + " n=" + std::to_string(n));
}

std::vector<std::pair<std::size_t, double>> NoiseProfile::medians_at(double noise) const {
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& c : cells)
        if (c.noise_level == noise && c.count > 0) out.emplace_back(c.n, c.median);
    std::sort(out.begin(), out.end());
    return out;
}

NoiseProfile build_noise_profile(const std::vector<CurveRecord>& records) {
    if (records.empty()) throw IncompleteGrid("no records to profile");
    NoiseProfile p;
    p.method = records[0].method;
    p.metric = records[0].metric;

    std::set<double> noises;
    std::set<std::size_t> ns;
    for (const auto& r : records) {
        if (r.method != p.method)
            throw ConfigError("profile expects a single method; saw " + p.method + " and " + r.method);
        if (r.metric != p.metric)
            throw ConfigError("profile expects a single metric");
        noises.insert(r.noise_level);
        ns.insert(r.n);
    }
    p.noise_levels.assign(noises.begin(), noises.end());
    p.n_grid.assign(ns.begin(), ns.end());

    std::string missing;
    for (double noise : p.noise_levels) {
        for (std::size_t n : p.n_grid) {
            ProfileCell c;
            c.noise_level = noise;
            c.n = n;
            std::vector<double> vals;
            for (const auto& r : records) {
                if (r.noise_level != noise || r.n != n) continue;
                if (r.error.empty() && !std::isnan(r.risk))
                    vals.push_back(r.risk);
                else
                    ++c.failures;
            }
            c.count = vals.size();
            if (c.count > 0) {
                c.median = stats::median(vals);
                c.q25 = stats::quantile(vals, 0.25);
                c.q75 = stats::quantile(vals, 0.75);
            } else {
                c.median = c.q25 = c.q75 = std::numeric_limits<double>::quiet_NaN();
                if (c.failures == 0)
                    missing += " (noise=" + fmt(noise) + ", n=" + std::to_string(n) + ")";
            }
            p.cells.push_back(c);
        }
    }
    if (!missing.empty()) throw IncompleteGrid("missing cells:" + missing);

    for (double noise : p.noise_levels) {
        auto med = p.medians_at(noise);
        Asymptote a;
        if (med.size() >= 2) {
            double m1 = med[med.size() - 2].second;
            double m2 = med[med.size() - 1].second;
            a.value = 0.5 * (m1 + m2);
            a.rel_gap = std::abs(m2 - m1) / std::max(std::abs(m1), 1e-300);
            a.converged = std::isfinite(a.rel_gap) && a.rel_gap <= 0.15;
        } else if (med.size() == 1) {
            a.value = med[0].second;
            a.rel_gap = std::numeric_limits<double>::infinity();
        }
        p.asymptotes[noise] = a;
    }
    return p;
}

std::string empirical_kind_name(EmpiricalKind k) {
    switch (k) {
        case EmpiricalKind::Benign: return "benign";
        case EmpiricalKind::Tempered: return "tempered";
        case EmpiricalKind::Catastrophic: return "catastrophic";
        case EmpiricalKind::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

EmpiricalRegime label_regime(const std::vector<std::pair<std::size_t, double>>& medians_by_n,
                             double bayes_floor, Metric metric, int K, double noise_scale,
                             double tol_cls, double tol_reg_factor) {
    if (medians_by_n.size() < 3)
        throw std::invalid_argument("regime labeling needs >= 3 grid points");
    for (std::size_t i = 1; i < medians_by_n.size(); ++i)
        if (medians_by_n[i].first <= medians_by_n[i - 1].first)
            throw std::invalid_argument("regime labeling expects ascending n");

    bool cls = metric_is_classification(metric);
    double tol = cls ? tol_cls : tol_reg_factor * noise_scale;

    EmpiricalRegime out;
    RegimeEvidence& ev = out.evidence;
    std::size_t k = medians_by_n.size() - 1;
    ev.tail = medians_by_n[k].second;
    ev.prev = medians_by_n[k - 1].second;
    ev.prev2 = medians_by_n[k - 2].second;
    ev.net_ratio = ev.prev2 > 0.0 ? ev.tail / ev.prev2
                                  : (ev.tail > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    ev.stab_rel = std::abs(ev.tail - ev.prev) / std::max(std::abs(ev.prev), 1e-300);
    ev.benign_cut = bayes_floor + tol;
    ev.catastrophic_cut = cls ? (1.0 - 1.0 / static_cast<double>(K)) - tol_cls
                              : bayes_floor + 10.0 * noise_scale;

    if (ev.tail <= ev.benign_cut) {
        out.kind = EmpiricalKind::Benign;
        return out;
    }
    bool catastrophic = cls ? ev.tail >= ev.catastrophic_cut
                            : (ev.net_ratio >= 1.5 || ev.tail >= ev.catastrophic_cut);
    if (catastrophic) {
        out.kind = EmpiricalKind::Catastrophic;
        return out;
    }
    if (std::isfinite(ev.stab_rel) && ev.stab_rel <= 0.15) {
        out.kind = EmpiricalKind::Tempered;
        out.tempered_level = 0.5 * (ev.tail + ev.prev);
        return out;
    }
    out.kind = EmpiricalKind::Inconclusive;
    return out;
}

// ---------------------------------------------------------------------------
// config

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

template <class T>
void get_to(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            j.at(key).get_to(out);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

void require_ascending(const std::vector<std::size_t>& grid, const std::string& what) {
    if (grid.empty()) throw ConfigError(what + " must be nonempty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw ConfigError(what + " must be strictly ascending");
}

}  // namespace

Config config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    check_keys(j, "config root",
               {"experiment", "id", "root_seed", "trials", "record_timing", "kr", "synthetic",
                "toy1d", "knn", "theory"});

    Config c;
    get_to(j, "experiment", c.experiment);
    get_to(j, "id", c.id);
    get_to(j, "root_seed", c.root_seed);
    get_to(j, "trials", c.trials);
    get_to(j, "record_timing", c.record_timing);

    if (j.contains("kr")) {
        const json& k = j.at("kr");
        check_keys(k, "kr", {"kernel", "bandwidth", "d", "delta", "sigma2", "n_grid", "n_test",
                             "expect_regime"});
        get_to(k, "kernel", c.kr.kernel);
        get_to(k, "bandwidth", c.kr.bandwidth);
        get_to(k, "d", c.kr.d);
        get_to(k, "delta", c.kr.delta);
        get_to(k, "sigma2", c.kr.sigma2);
        get_to(k, "n_grid", c.kr.n_grid);
        get_to(k, "n_test", c.kr.n_test);
        get_to(k, "expect_regime", c.kr.expect_regime);
    }
    if (j.contains("synthetic")) {
        const json& k = j.at("synthetic");
        check_keys(k, "synthetic",
                   {"alphas", "M", "coeff_exponent", "budget", "sigma2", "n_grid", "n_test"});
        get_to(k, "alphas", c.synthetic.alphas);
        get_to(k, "M", c.synthetic.M);
        get_to(k, "coeff_exponent", c.synthetic.coeff_exponent);
        get_to(k, "budget", c.synthetic.budget);
        get_to(k, "sigma2", c.synthetic.sigma2);
        get_to(k, "n_grid", c.synthetic.n_grid);
        get_to(k, "n_test", c.synthetic.n_test);
    }
    if (j.contains("toy1d")) {
        const json& k = j.at("toy1d");
        check_keys(k, "toy1d", {"methods", "singular_exponent", "sigma2", "n_grid", "n_test"});
        get_to(k, "methods", c.toy1d.methods);
        get_to(k, "singular_exponent", c.toy1d.singular_exponent);
        get_to(k, "sigma2", c.toy1d.sigma2);
        get_to(k, "n_grid", c.toy1d.n_grid);
        get_to(k, "n_test", c.toy1d.n_test);
    }
    if (j.contains("knn")) {
        const json& k = j.at("knn");
        check_keys(k, "knn", {"methods", "p_grid", "n_grid", "n_test", "images", "labels",
                              "subsample", "bandwidth"});
        get_to(k, "methods", c.knn.methods);
        get_to(k, "p_grid", c.knn.p_grid);
        get_to(k, "n_grid", c.knn.n_grid);
        get_to(k, "n_test", c.knn.n_test);
        get_to(k, "images", c.knn.images);
        get_to(k, "labels", c.knn.labels);
        get_to(k, "subsample", c.knn.subsample);
        get_to(k, "bandwidth", c.knn.bandwidth);
    }
    if (j.contains("theory")) {
        const json& k = j.at("theory");
        check_keys(k, "theory", {"family", "alpha", "M", "delta", "delta_prime", "sigma2",
                                 "coeff_exponent", "budget", "n_grid"});
        get_to(k, "family", c.theory.family);
        get_to(k, "alpha", c.theory.alpha);
        get_to(k, "M", c.theory.M);
        get_to(k, "delta", c.theory.delta);
        get_to(k, "delta_prime", c.theory.delta_prime);
        get_to(k, "sigma2", c.theory.sigma2);
        get_to(k, "coeff_exponent", c.theory.coeff_exponent);
        get_to(k, "budget", c.theory.budget);
        get_to(k, "n_grid", c.theory.n_grid);
    }

    // validation (config errors must abort before any cell runs)
    static const std::set<std::string> experiments = {"theory", "kr-sphere", "synthetic", "toy1d",
                                                      "knn-profile"};
    if (!experiments.count(c.experiment))
        throw ConfigError("unknown experiment '" + c.experiment + "'");
    if (c.id.empty()) {
        c.id = c.experiment;
        for (auto& ch : c.id)
            if (ch == '-') ch = '_';
    }
    check_csv_safe(c.id);
    if (c.trials < 1) throw ConfigError("trials must be >= 1");

    if (c.kr.kernel != "gaussian" && c.kr.kernel != "laplace")
        throw ConfigError("kr.kernel must be gaussian or laplace");
    if (!(c.kr.bandwidth > 0.0)) throw ConfigError("kr.bandwidth must be positive");
    if (c.kr.d < 1) throw ConfigError("kr.d must be >= 1");
    if (c.kr.delta < 0.0) throw ConfigError("kr.delta must be nonnegative");
    if (c.kr.sigma2 < 0.0) throw ConfigError("kr.sigma2 must be nonnegative");
    require_ascending(c.kr.n_grid, "kr.n_grid");

    for (double a : c.synthetic.alphas)
        if (!(a > 0.0)) throw ConfigError("synthetic.alphas must be positive");
    if (c.synthetic.alphas.empty()) throw ConfigError("synthetic.alphas must be nonempty");
    if (c.synthetic.M < 2) throw ConfigError("synthetic.M must be >= 2");
    require_ascending(c.synthetic.n_grid, "synthetic.n_grid");
    if (c.synthetic.n_grid.back() >= c.synthetic.M)
        throw ConfigError("synthetic n_grid must stay below M");
    if (c.synthetic.sigma2 < 0.0 || c.synthetic.budget < 0.0)
        throw ConfigError("synthetic.sigma2/budget must be nonnegative");

    static const std::set<std::string> toy_methods = {"singular_smoother", "piecewise_linear",
                                                      "polynomial_interp"};
    if (c.toy1d.methods.empty()) throw ConfigError("toy1d.methods must be nonempty");
    for (const auto& m : c.toy1d.methods)
        if (!toy_methods.count(m)) throw ConfigError("unknown toy1d method '" + m + "'");
    if (!(c.toy1d.singular_exponent > 0.0))
        throw ConfigError("toy1d.singular_exponent must be positive");
    if (c.toy1d.sigma2 < 0.0) throw ConfigError("toy1d.sigma2 must be nonnegative");
    require_ascending(c.toy1d.n_grid, "toy1d.n_grid");

    static const std::set<std::string> knn_methods = {"one_nn", "knn_logn", "kernel"};
    if (c.knn.methods.empty()) throw ConfigError("knn.methods must be nonempty");
    for (const auto& m : c.knn.methods)
        if (!knn_methods.count(m)) throw ConfigError("unknown knn method '" + m + "'");
    if (c.knn.p_grid.empty()) throw ConfigError("knn.p_grid must be nonempty");
    for (double p : c.knn.p_grid)
        if (p < 0.0 || p >= 1.0) throw ConfigError("knn.p_grid values must lie in [0,1)");
    require_ascending(c.knn.n_grid, "knn.n_grid");
    if (!(c.knn.bandwidth > 0.0)) throw ConfigError("knn.bandwidth must be positive");
    if (c.knn.images.empty() != c.knn.labels.empty())
        throw ConfigError("knn.images and knn.labels must be given together");

    static const std::set<std::string> families = {"powerlaw", "logpowerlaw", "superpolynomial"};
    if (!families.count(c.theory.family))
        throw ConfigError("theory.family must be powerlaw, logpowerlaw or superpolynomial");
    if (!(c.theory.alpha > 0.0)) throw ConfigError("theory.alpha must be positive");
    if (c.theory.M < 2) throw ConfigError("theory.M must be >= 2");
    if (c.theory.delta < 0.0 || c.theory.delta_prime < 0.0)
        throw ConfigError("theory ridges must be nonnegative");
    if (c.theory.sigma2 < 0.0 || c.theory.budget < 0.0)
        throw ConfigError("theory.sigma2/budget must be nonnegative");
    require_ascending(c.theory.n_grid, "theory.n_grid");

    return c;
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const Config& c) {
    json j;
    j["experiment"] = c.experiment;
    j["id"] = c.id;
    j["root_seed"] = c.root_seed;
    j["trials"] = c.trials;
    j["record_timing"] = c.record_timing;
    j["kr"] = {{"kernel", c.kr.kernel},       {"bandwidth", c.kr.bandwidth},
               {"d", c.kr.d},                 {"delta", c.kr.delta},
               {"sigma2", c.kr.sigma2},       {"n_grid", c.kr.n_grid},
               {"n_test", c.kr.n_test},       {"expect_regime", c.kr.expect_regime}};
    j["synthetic"] = {{"alphas", c.synthetic.alphas},
                      {"M", c.synthetic.M},
                      {"coeff_exponent", c.synthetic.coeff_exponent},
                      {"budget", c.synthetic.budget},
                      {"sigma2", c.synthetic.sigma2},
                      {"n_grid", c.synthetic.n_grid},
                      {"n_test", c.synthetic.n_test}};
    j["toy1d"] = {{"methods", c.toy1d.methods},
                  {"singular_exponent", c.toy1d.singular_exponent},
                  {"sigma2", c.toy1d.sigma2},
                  {"n_grid", c.toy1d.n_grid},
                  {"n_test", c.toy1d.n_test}};
    j["knn"] = {{"methods", c.knn.methods}, {"p_grid", c.knn.p_grid},
                {"n_grid", c.knn.n_grid},   {"n_test", c.knn.n_test},
                {"images", c.knn.images},   {"labels", c.knn.labels},
                {"subsample", c.knn.subsample}, {"bandwidth", c.knn.bandwidth}};
    j["theory"] = {{"family", c.theory.family},
                   {"alpha", c.theory.alpha},
                   {"M", c.theory.M},
                   {"delta", c.theory.delta},
                   {"delta_prime", c.theory.delta_prime},
                   {"sigma2", c.theory.sigma2},
                   {"coeff_exponent", c.theory.coeff_exponent},
                   {"budget", c.theory.budget},
                   {"n_grid", c.theory.n_grid}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// experiment execution

namespace {

using Task = std::function<std::vector<CurveRecord>()>;

std::size_t worker_count() {
    const char* e = std::getenv("KRLAB_WORKERS");
    if (!e) return 1;
    long v = std::strtol(e, nullptr, 10);
    return v >= 1 ? static_cast<std::size_t>(v) : 1;
}

std::vector<CurveRecord> run_tasks(std::vector<Task>& tasks) {
    std::vector<std::vector<CurveRecord>> results(tasks.size());
    std::size_t workers = std::min(worker_count(), tasks.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = tasks[i]();
    } else {
        std::atomic<std::size_t> next{0};
        auto body = [&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                results[i] = tasks[i]();
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    std::vector<CurveRecord> flat;
    for (auto& rs : results)
        for (auto& r : rs) flat.push_back(std::move(r));
    sort_records(flat);
    return flat;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// one ridge-regression measurement on sphere data with pure-noise targets
CurveRecord kr_sphere_cell(const Config& cfg, std::size_t n, std::size_t trial,
                           std::uint64_t cell_key) {
    CurveRecord r;
    r.experiment_id = cfg.id;
    r.method = cfg.kr.kernel + "_d" + std::to_string(cfg.kr.d) + "_delta" + fmt(cfg.kr.delta);
    r.n = n;
    r.noise_kind = "gaussian_additive";
    r.noise_level = cfg.kr.sigma2;
    r.metric = Metric::ExcessMSE;
    r.seed = rng::derive_seed(cfg.root_seed, cell_key, trial);

    auto t0 = std::chrono::steady_clock::now();
    try {
        rng::Stream st(r.seed);
        Eigen::MatrixXd X = kr::sample_sphere(cfg.kr.d, static_cast<int>(n), st.next_u64());
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        double sig = std::sqrt(cfg.kr.sigma2);
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = sig * st.gauss();
        Eigen::MatrixXd Xt =
            kr::sample_sphere(cfg.kr.d, static_cast<int>(cfg.kr.n_test), st.next_u64());

        kr::KernelSpec kern{cfg.kr.kernel == "gaussian" ? kr::KernelKind::Gaussian
                                                        : kr::KernelKind::Laplace,
                            cfg.kr.bandwidth};
        kr::KRFit fit = kr::kr_fit(kern, X, y, cfg.kr.delta);
        Eigen::VectorXd pred = kr::kr_predict(kern, X, fit, Xt);
        r.risk = kr::test_mse(pred, Eigen::VectorXd::Zero(pred.size()));
        r.condition = fit.condition;
    } catch (const std::exception& e) {
        r.error = e.what();
        r.risk = std::numeric_limits<double>::quiet_NaN();
    }
    if (cfg.record_timing) r.wall_ms = elapsed_ms(t0);
    return r;
}

void append_toy_records(const Config& cfg, const std::string& method_name,
                        const interpolators::ToyMethod& method, std::vector<Task>& tasks) {
    for (std::size_t n : cfg.toy1d.n_grid) {
        tasks.push_back([&cfg, method_name, method, n]() {
            auto t0 = std::chrono::steady_clock::now();
            auto cells = interpolators::toy_regression_curve(method, {n}, cfg.toy1d.sigma2,
                                                             cfg.trials, cfg.root_seed,
                                                             cfg.toy1d.n_test);
            std::vector<CurveRecord> rs;
            double ms = cfg.record_timing ? elapsed_ms(t0) / static_cast<double>(cfg.trials) : 0.0;
            for (std::size_t trial = 0; trial < cells[0].excess_mse.size(); ++trial) {
                CurveRecord r;
                r.experiment_id = cfg.id;
                r.method = method_name;
                r.n = n;
                r.noise_kind = "gaussian_additive";
                r.noise_level = cfg.toy1d.sigma2;
                r.seed = rng::derive_seed(cfg.root_seed, n, trial);
                r.metric = Metric::ExcessMSE;
                r.risk = cells[0].excess_mse[trial];
                r.wall_ms = ms;
                rs.push_back(std::move(r));
            }
            return rs;
        });
    }
}

interpolators::ToyMethod toy_method_from_name(const Config& cfg, const std::string& name) {
    if (name == "singular_smoother")
        return interpolators::ToyMethod::singular(cfg.toy1d.singular_exponent);
    if (name == "piecewise_linear") return interpolators::ToyMethod::piecewise_linear();
    if (name == "polynomial_interp") return interpolators::ToyMethod::polynomial();
    throw ConfigError("unknown toy method " + name);
}

// --- nearest-neighbor / kernel profiles on synthetic or real data ----------

void append_knn_synthetic(const Config& cfg, const std::string& method, double p,
                          std::vector<Task>& tasks) {
    if (method == "kernel")
        throw ConfigError("the kernel baseline needs image data (knn.images/knn.labels)");
    interpolators::ToyMethod m = method == "one_nn" ? interpolators::ToyMethod::one_nn()
                                                    : interpolators::ToyMethod::knn_logn();
    tasks.push_back([&cfg, method, m, p]() {
        auto t0 = std::chrono::steady_clock::now();
        auto cells = interpolators::nn_classification_curve(m, cfg.knn.n_grid, p, cfg.trials,
                                                            cfg.root_seed, cfg.knn.n_test);
        std::vector<CurveRecord> rs;
        double total = elapsed_ms(t0);
        for (const auto& cell : cells) {
            for (std::size_t trial = 0; trial < cell.clean_error.size(); ++trial) {
                CurveRecord base;
                base.experiment_id = cfg.id;
                base.method = method;
                base.n = cell.n;
                base.noise_kind = "label_flip";
                base.noise_level = p;
                base.seed = rng::derive_seed(cfg.root_seed, cell.n, trial);
                base.wall_ms = cfg.record_timing
                                   ? total / static_cast<double>(2 * cells.size() *
                                                                 cell.clean_error.size())
                                   : 0.0;
                CurveRecord clean = base;
                clean.metric = Metric::ClassificationError;
                clean.risk = cell.clean_error[trial];
                CurveRecord noisy = base;
                noisy.metric = Metric::NoisyClassificationError;
                noisy.risk = cell.noisy_error[trial];
                rs.push_back(std::move(clean));
                rs.push_back(std::move(noisy));
            }
        }
        return rs;
    });
}

void flip_labels_exact(std::vector<int>& labels, int K, double p, rng::Stream& st) {
    std::size_t n = labels.size();
    std::size_t nflip = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < nflip; ++i) {
        std::size_t j = i + static_cast<std::size_t>(st.below(n - i));
        std::swap(idx[i], idx[j]);
        int offset = 1 + static_cast<int>(st.below(static_cast<std::uint64_t>(K - 1)));
        labels[idx[i]] = (labels[idx[i]] + offset) % K;
    }
}

// brute-force k-NN vote over euclidean distances (tie: nearest neighbor wins)
int knn_vote(const Eigen::MatrixXd& train, const std::vector<int>& labels,
             const Eigen::VectorXd& query, int k) {
    Eigen::VectorXd d2 = (train.rowwise() - query.transpose()).rowwise().squaredNorm();
    std::vector<int> order(static_cast<std::size_t>(d2.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
        return d2(a) != d2(b) ? d2(a) < d2(b) : a < b;  // ties toward the lowest index
    });
    int ones = 0;
    for (int i = 0; i < k; ++i) ones += labels[static_cast<std::size_t>(order[i])];
    if (2 * ones == k) return labels[static_cast<std::size_t>(order[0])];
    return 2 * ones > k ? 1 : 0;
}

void append_knn_real(const Config& cfg, std::shared_ptr<const data::ClassificationDataset> base,
                     const std::string& method, double p, std::vector<Task>& tasks) {
    std::uint64_t cell_key = fnv1a(method + "|label_flip|" + fmt(p));
    for (std::size_t n : cfg.knn.n_grid) {
        tasks.push_back([&cfg, base, method, p, n, cell_key]() {
            std::vector<CurveRecord> rs;
            for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
                CurveRecord r;
                r.experiment_id = cfg.id;
                r.method = method;
                r.n = n;
                r.noise_kind = "label_flip";
                r.noise_level = p;
                r.seed = rng::derive_seed(cfg.root_seed, cell_key ^ n, trial);
                auto t0 = std::chrono::steady_clock::now();
                try {
                    rng::Stream st(r.seed);
                    const data::ClassificationDataset& ds = *base;
                    std::size_t total = static_cast<std::size_t>(ds.n());
                    if (n >= total)
                        throw ConfigError("dataset too small for requested train size");
                    std::size_t ntest = std::min(cfg.knn.n_test, total - n);
                    if (ntest == 0) throw ConfigError("no points left for the test split");
                    // disjoint train/test split by partial shuffle
                    std::vector<std::size_t> idx(total);
                    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
                    for (std::size_t i = 0; i < n + ntest; ++i) {
                        std::size_t j = i + static_cast<std::size_t>(st.below(total - i));
                        std::swap(idx[i], idx[j]);
                    }
                    Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(n), ds.inputs.cols());
                    std::vector<int> ytr(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        Xtr.row(static_cast<Eigen::Index>(i)) =
                            ds.inputs.row(static_cast<Eigen::Index>(idx[i]));
                        ytr[i] = ds.labels[idx[i]];
                    }
                    Eigen::MatrixXd Xte(static_cast<Eigen::Index>(ntest), ds.inputs.cols());
                    std::vector<int> yte(ntest);
                    for (std::size_t i = 0; i < ntest; ++i) {
                        Xte.row(static_cast<Eigen::Index>(i)) =
                            ds.inputs.row(static_cast<Eigen::Index>(idx[n + i]));
                        yte[i] = ds.labels[idx[n + i]];
                    }
                    flip_labels_exact(ytr, ds.K, p, st);
                    std::vector<int> yte_noisy = yte;
                    flip_labels_exact(yte_noisy, ds.K, p, st);

                    std::vector<int> pred(ntest);
                    if (method == "kernel") {
                        kr::KernelSpec kern{kr::KernelKind::Gaussian, cfg.knn.bandwidth};
                        kr::KRFit fit = kr::kr_fit(kern, Xtr, data::encode_pm1(ytr), 0.0);
                        pred = data::decode_pm1(kr::kr_predict(kern, Xtr, fit, Xte));
                        r.condition = fit.condition;
                    } else {
                        int k = method == "one_nn"
                                    ? 1
                                    : std::max(1L, std::lround(std::log(static_cast<double>(n))));
                        for (std::size_t i = 0; i < ntest; ++i)
                            pred[i] = knn_vote(Xtr, ytr, Xte.row(static_cast<Eigen::Index>(i)), k);
                    }
                    // clean-test record now, noisy-test sibling after
                    r.metric = Metric::ClassificationError;
                    r.risk = data::classification_error(pred, yte);
                    if (cfg.record_timing) r.wall_ms = elapsed_ms(t0);
                    CurveRecord noisy = r;
                    noisy.metric = Metric::NoisyClassificationError;
                    noisy.risk = data::classification_error(pred, yte_noisy);
                    rs.push_back(r);
                    rs.push_back(std::move(noisy));
                    continue;
                } catch (const std::exception& e) {
                    r.error = e.what();
                    r.risk = std::numeric_limits<double>::quiet_NaN();
                    r.metric = Metric::ClassificationError;
                    if (cfg.record_timing) r.wall_ms = elapsed_ms(t0);
                    rs.push_back(r);
                }
            }
            return rs;
        });
    }
}

}  // namespace

std::vector<CurveRecord> run_experiment(const Config& config) {
    std::vector<Task> tasks;

    if (config.experiment == "kr-sphere") {
        for (std::size_t n : config.kr.n_grid) {
            std::uint64_t cell_key = fnv1a(config.kr.kernel + "|d" + std::to_string(config.kr.d) +
                                           "|delta" + fmt(config.kr.delta) + "|n" +
                                           std::to_string(n));
            for (std::size_t trial = 0; trial < config.trials; ++trial)
                tasks.push_back([&config, n, trial, cell_key]() {
                    return std::vector<CurveRecord>{kr_sphere_cell(config, n, trial, cell_key)};
                });
        }
    } else if (config.experiment == "synthetic") {
        for (double alpha : config.synthetic.alphas) {
            for (std::size_t n : config.synthetic.n_grid) {
                std::uint64_t cell_key = fnv1a("synthetic|a" + fmt(alpha) + "|n" + std::to_string(n));
                for (std::size_t trial = 0; trial < config.trials; ++trial)
                    tasks.push_back([&config, alpha, n, trial, cell_key]() {
                        CurveRecord r;
                        r.experiment_id = config.id;
                        r.method = "synthetic_powerlaw_a" + fmt(alpha);
                        r.n = n;
                        r.noise_kind = "gaussian_additive";
                        r.noise_level = config.synthetic.sigma2;
                        r.metric = Metric::MSE;
                        r.seed = rng::derive_seed(config.root_seed, cell_key, trial);
                        auto t0 = std::chrono::steady_clock::now();
                        try {
                            synthetic::SyntheticTask task;
                            task.M = config.synthetic.M;
                            task.alpha = alpha;
                            task.coeff_exponent = config.synthetic.coeff_exponent;
                            task.budget = config.synthetic.budget;
                            task.sigma2 = config.synthetic.sigma2;
                            task.n = n;
                            task.n_test = config.synthetic.n_test;
                            task.seed = r.seed;
                            r.risk = synthetic::run_synthetic_kr(task);
                        } catch (const std::exception& e) {
                            r.error = e.what();
                            r.risk = std::numeric_limits<double>::quiet_NaN();
                        }
                        if (config.record_timing) r.wall_ms = elapsed_ms(t0);
                        return std::vector<CurveRecord>{r};
                    });
            }
        }
    } else if (config.experiment == "toy1d") {
        for (const auto& name : config.toy1d.methods)
            append_toy_records(config, name, toy_method_from_name(config, name), tasks);
    } else if (config.experiment == "knn-profile") {
        if (config.knn.images.empty()) {
            for (const auto& method : config.knn.methods)
                for (double p : config.knn.p_grid) append_knn_synthetic(config, method, p, tasks);
        } else {
            // loaded once up front; tasks share the immutable dataset
            data::ClassificationDataset loaded = data::load_idx(config.knn.images, config.knn.labels);
            if (loaded.K > 2) loaded = data::binarize(loaded, data::even_odd_map());
            if (config.knn.subsample > 0 &&
                config.knn.subsample < static_cast<std::size_t>(loaded.n()))
                loaded = data::subsample(loaded, config.knn.subsample, config.root_seed);
            auto base = std::make_shared<const data::ClassificationDataset>(std::move(loaded));
            for (const auto& method : config.knn.methods)
                for (double p : config.knn.p_grid) append_knn_real(config, base, method, p, tasks);
        }
    } else if (config.experiment == "theory") {
        tasks.push_back([&config]() {
            spectra::Spectrum s;
            if (config.theory.family == "powerlaw")
                s = spectra::make_powerlaw(config.theory.alpha, config.theory.M, config.theory.delta);
            else if (config.theory.family == "logpowerlaw")
                s = spectra::make_logpowerlaw(config.theory.alpha, config.theory.M,
                                              config.theory.delta);
            else
                s = spectra::make_superpolynomial(config.theory.M, config.theory.delta);
            s.delta_prime = config.theory.delta_prime;
            spectra::TargetCoefficients coeffs =
                config.theory.budget > 0.0
                    ? spectra::make_power_coefficients(s, config.theory.coeff_exponent,
                                                       config.theory.budget)
                    : spectra::make_zero_coefficients(s);

            std::string method = "theory_" + config.theory.family +
                                 (config.theory.family == "superpolynomial" ? "" : "_a" + fmt(config.theory.alpha)) +
                                 "_delta" + fmt(config.theory.delta);
            auto points = eigenlearning::asymptotic_sweep(s, coeffs, config.theory.sigma2,
                                                          config.theory.n_grid);
            std::vector<CurveRecord> rs;
            for (const auto& pt : points) {
                CurveRecord r;
                r.experiment_id = config.id;
                r.method = method;
                r.n = pt.n;
                r.noise_kind = "gaussian_additive";
                r.noise_level = config.theory.sigma2;
                r.seed = 0;
                if (pt.estimate) {
                    r.metric = Metric::MSE;
                    r.risk = pt.estimate->predicted_mse;
                    r.condition = pt.estimate->C;  // effective ridge, useful diagnostics
                    CurveRecord ex = r;
                    ex.metric = Metric::ExcessMSE;
                    ex.risk = pt.estimate->predicted_excess;
                    rs.push_back(r);
                    rs.push_back(std::move(ex));
                } else {
                    r.metric = Metric::MSE;
                    r.error = pt.error;
                    r.risk = std::numeric_limits<double>::quiet_NaN();
                    rs.push_back(r);
                }
            }
            return rs;
        });
    } else {
        throw ConfigError("unknown experiment '" + config.experiment + "'");
    }

    return run_tasks(tasks);
}

std::vector<OverlayRow> theory_overlay(const Config& config,
                                       const std::vector<CurveRecord>& records) {
    if (config.experiment != "synthetic")
        throw NoSpectrum("only synthetic experiments carry a spectral description");

    std::vector<OverlayRow> out;
    for (double alpha : config.synthetic.alphas) {
        spectra::Spectrum s = spectra::make_powerlaw(alpha, config.synthetic.M, 0.0);
        spectra::TargetCoefficients coeffs =
            config.synthetic.budget > 0.0
                ? spectra::make_power_coefficients(s, config.synthetic.coeff_exponent,
                                                   config.synthetic.budget)
                : spectra::make_zero_coefficients(s);
        std::string method = "synthetic_powerlaw_a" + fmt(alpha);
        for (std::size_t n : config.synthetic.n_grid) {
            std::vector<double> vals;
            for (const auto& r : records)
                if (r.method == method && r.n == n && r.metric == Metric::MSE && r.error.empty())
                    vals.push_back(r.risk);
            if (vals.empty())
                throw IncompleteGrid("no empirical records for " + method + " at n=" +
                                     std::to_string(n));
            OverlayRow row;
            row.alpha = alpha;
            row.n = n;
            row.empirical_median = stats::median(vals);
            row.predicted_mse =
                eigenlearning::risk_estimate(s, coeffs, n, config.synthetic.sigma2).predicted_mse;
            row.rel_gap = std::abs(row.empirical_median - row.predicted_mse) /
                          std::max(row.predicted_mse, 1e-300);
            out.push_back(row);
        }
    }
    return out;
}

}  // namespace krlab::harness
