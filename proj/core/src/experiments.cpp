#include "cil/experiments.hpp"

#include "cil/dual.hpp"
#include "cil/interface.hpp"
#include "cil/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

namespace cil {

namespace {

using Defaults = std::map<std::string, std::string>;

const Defaults& common_defaults() {
    static const Defaults d{{"lambda", "2"},      {"range", "1"},   {"seed", "1"}, {"c_speed", "auto"},
                            {"guard", "20"},      {"out", "results"}, {"threads", "0"}};
    return d;
}

// Command-specific keys. "auto" grids scale with the horizon.
const std::map<std::string, Defaults>& schemas() {
    static const std::map<std::string, Defaults> s{
        {"duality_check", {{"reps", "1000"}, {"horizon", "20"}, {"sites", "41"}, {"initial", "random"}}},
        {"tightness",
         {{"reps", "2000"}, {"horizon", "200"}, {"t_grid", "auto"}, {"quantile", "0.95"}, {"resamples", "2000"}}},
        {"clt", {{"reps", "5000"}, {"horizon", "400"}, {"resamples", "2000"}, {"ks_alpha", "0.01"}}},
        {"fdd",
         {{"reps", "5000"}, {"horizon", "150"}, {"a_grid", "1,2,3"}, {"rho_max", "0.05"}, {"var_tol", "0.2"}}},
        {"sigma_dual",
         {{"reps", "60"},
          {"horizon", "1000"},
          {"resamples", "2000"},
          {"min_increments", "10000"},
          {"lag1_max", "0.05"},
          {"interface_summary", ""},
          {"interface_reps", "2000"},
          {"interface_horizon", "400"},
          {"tolerance", "0.15"}}},
        {"regeneration",
         {{"reps", "2000"},
          {"horizon", "350"},
          {"s_grid", "0,50,100"},
          {"span", "250"},
          {"threshold", "30"},
          {"p_max", "0.1"},
          {"spacing", "1"}}},
        {"coalescence",
         {{"reps", "4000"},
          {"horizon", "800"},
          {"x", "0"},
          {"y", "2"},
          {"pair_t", "auto"},
          {"probe", "0"},
          {"density_t", "auto"},
          {"density_reps", "4000"},
          {"crossing_u", "1"},
          {"crossing_t", "auto"},
          {"crossing_reps", "1000"},
          {"slope_target", "-0.5"},
          {"slope_tol", "0.1"}}},
        {"truncation",
         {{"reps", "1000"},
          {"horizon", "200"},
          {"spacing", "1"},
          {"max_fraction", "0.01"},
          {"guards", "10,20,40"},
          {"dual_reps", "60"},
          {"dual_horizon", "1000"},
          {"guard_tol", "0.05"}}},
        {"survival",
         {{"reps", "50000"},
          {"horizon", "400"},
          {"t_grid", "5,10,20,40,80"},
          {"level_step", "5"},
          {"beta", "0.2"},
          {"gamma", "0.1"},
          {"gamma_until", "100"},
          {"cap", "100"}}},
    };
    return s;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

// Short form for verdict details.
std::string num(double v) {
    std::ostringstream ss;
    ss << std::setprecision(4) << v;
    return ss.str();
}

std::string hex16(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << v;
    return ss.str();
}

std::vector<double> scaled_grid(const ExperimentConfig& cfg, const std::string& key, std::vector<double> fractions) {
    if (cfg.text(key) != "auto") return cfg.reals(key);
    for (double& f : fractions) f = quantize_time(f * cfg.horizon);
    return fractions;
}

void check_grid(const std::string& key, const std::vector<double>& grid, double horizon) {
    if (grid.empty()) throw ConfigError(key + ": empty grid");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0) || grid[k] > horizon) throw ConfigError(key + ": times must lie in (0, horizon]");
        if (k > 0 && !(grid[k] > grid[k - 1])) throw ConfigError(key + ": times must increase");
    }
}

std::vector<double> spaced_grid(double horizon, double spacing) {
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::floor(horizon / spacing + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) g.push_back(quantize_time(static_cast<double>(k) * spacing));
    if (g.back() < horizon) g.push_back(horizon);
    return g;
}

Window centered(int half, double horizon) { return Window{-half, half, horizon}; }

std::vector<std::uint64_t> rep_seeds(std::uint64_t master, std::size_t n) {
    std::vector<std::uint64_t> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = replication_seed(master, k);
    return s;
}

template <class T>
std::vector<T> run_reps(const ExperimentConfig& cfg, std::size_t n, const std::function<T(std::size_t)>& f) {
    return parallel_map<T>(n, cfg.threads, f);
}

void add_verdict(ExperimentResult& r, std::string name, bool pass, std::string detail) {
    r.verdicts.push_back({std::move(name), pass, std::move(detail)});
}

SeriesPoint proportion_point(double t, std::size_t hits, std::size_t n) {
    const auto [lo, hi] = clopper_pearson(hits, n);
    return {t, static_cast<double>(hits) / static_cast<double>(n), lo, hi, n};
}

// Interface ensemble at one time, shared by clt and the sigma cross-check.
struct InterfaceEnsemble {
    std::vector<double> scaled;
    std::size_t flagged = 0;
    std::string table;
};

InterfaceEnsemble interface_ensemble(const ExperimentConfig& cfg, double t, std::size_t reps,
                                     std::uint64_t master) {
    const double times[] = {t};
    const int half = cfg.window.half_width(t);
    const auto seeds = rep_seeds(master, reps);
    const auto traces = run_reps<InterfaceTrace>(cfg, reps, [&](std::size_t k) {
        const auto h = sample_window(cfg.rates, centered(half, t), seeds[k]);
        return run_heaviside(h, times, cfg.window);
    });
    InterfaceEnsemble e;
    std::ostringstream tab;
    for (std::size_t k = 0; k < reps; ++k) {
        e.scaled.push_back(traces[k].states[0].i() / std::sqrt(t));
        e.flagged += !traces[k].all_ok();
        traces[k].write_csv(tab, k, seeds[k], k == 0);
    }
    e.table = tab.str();
    return e;
}

// Dual paths for the renewal estimate. One path per replication; a path is
// kept under guard g when its running ancestor is alive through H - g.
struct DualPaths {
    std::vector<std::uint64_t> seeds;
    std::vector<std::optional<AncestorPath>> paths;
    std::vector<std::optional<ReachTable>> reach;
};

DualPaths sample_dual_paths(const ExperimentConfig& cfg, std::size_t reps, double horizon, std::uint64_t master) {
    DualPaths d;
    d.seeds = rep_seeds(master, reps);
    const int half = DualWindow{}.half_width(horizon);
    struct One {
        AncestorPath path;
        ReachTable reach;
    };
    auto all = run_reps<One>(cfg, reps, [&](std::size_t k) {
        const auto h = sample_window(cfg.rates, centered(half, horizon), d.seeds[k]);
        return One{ancestor_process(h, 0, 0.0, horizon), reach_sweep(h, horizon)};
    });
    for (auto& o : all) {
        d.paths.emplace_back(std::move(o.path));
        d.reach.emplace_back(std::move(o.reach));
    }
    return d;
}

struct GuardRun {
    std::vector<RenewalRecord> records;
    std::vector<std::size_t> kept;
    std::size_t rejected = 0;
};

GuardRun renewal_records(const DualPaths& d, double guard) {
    GuardRun g;
    for (std::size_t k = 0; k < d.paths.size(); ++k) {
        const auto& p = *d.paths[k];
        if (p.death && *p.death < p.horizon - guard) {
            ++g.rejected;
            continue;
        }
        g.records.push_back(renewal_times(p, *d.reach[k], guard));
        g.kept.push_back(k);
    }
    return g;
}

double lag1_autocorrelation(const std::vector<RenewalRecord>& records) {
    std::vector<double> a;
    std::vector<double> b;
    for (const auto& r : records) {
        const auto inc = r.increments();
        for (std::size_t j = 0; j + 1 < inc.size(); ++j) {
            a.push_back(inc[j].second);
            b.push_back(inc[j + 1].second);
        }
    }
    if (a.size() < 3) return std::nan("");
    return pearson(a, b);
}

} // namespace

const std::string& ExperimentConfig::text(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw ConfigError("experiment " + name + " has no key '" + key + "'");
    return it->second;
}

double ExperimentConfig::real(const std::string& key) const { return parse_real(key, text(key)); }
std::int64_t ExperimentConfig::integer(const std::string& key) const { return parse_integer(key, text(key)); }
std::vector<double> ExperimentConfig::reals(const std::string& key) const { return parse_reals(key, text(key)); }

std::string ExperimentConfig::canonical() const {
    std::string out;
    for (const auto& [k, v] : values) {
        if (k == "out" || k == "threads") continue;
        out += k + " = " + v + "\n";
    }
    return out;
}

std::string ExperimentConfig::hash() const { return hex16(fnv1a(name + "\n" + canonical())); }

std::filesystem::path ExperimentConfig::output_dir() const { return out / (name + "-" + hash()); }

std::vector<std::string> experiment_names() {
    std::vector<std::string> n;
    for (const auto& [k, v] : schemas()) n.push_back(k);
    return n;
}

ExperimentConfig resolve_config(const std::string& command, const Config& settings) {
    const auto sit = schemas().find(command);
    if (sit == schemas().end()) throw ConfigError("unknown experiment '" + command + "'");
    ExperimentConfig c;
    c.name = command;
    c.values = common_defaults();
    for (const auto& [k, v] : sit->second) c.values[k] = v;
    for (const auto& [k, v] : settings.entries()) {
        if (!c.values.count(k)) throw ConfigError("experiment " + command + " does not take key '" + k + "'");
        c.values[k] = v;
    }

    c.rates.lambda = c.real("lambda");
    const auto range = c.integer("range");
    if (range < 1 || range > 64) throw ConfigError("range must be in [1, 64]");
    c.rates.range = static_cast<int>(range);
    try {
        c.rates.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    c.horizon = c.real("horizon");
    if (!(c.horizon > 0.0) || c.horizon > kMaxHorizon) throw ConfigError("horizon must be in (0, 4096]");
    const auto reps = c.integer("reps");
    if (reps < 1 || reps > 100'000'000) throw ConfigError("reps must be in [1, 1e8]");
    c.reps = static_cast<int>(reps);
    c.seed = parse_unsigned("seed", c.text("seed"));
    c.window = WindowPolicy::for_rates(c.rates);
    if (c.text("c_speed") != "auto") {
        c.window.c_speed = c.real("c_speed");
        if (!(c.window.c_speed > 0.0)) throw ConfigError("c_speed must be positive");
    }
    c.guard = c.real("guard");
    if (!(c.guard >= 0.0)) throw ConfigError("guard must be nonnegative");
    c.out = c.text("out");
    const auto threads = c.integer("threads");
    if (threads < 0) throw ConfigError("threads must be nonnegative");
    c.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : static_cast<unsigned>(threads);
    return c;
}

bool ExperimentResult::passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string ExperimentResult::summary_json() const {
    using nlohmann::ordered_json;
    ordered_json j;
    j["experiment"] = config.name;
    j["config_hash"] = config.hash();
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : config.values) {
        if (k != "out" && k != "threads") cfg[k] = v;
    }
    j["config"] = cfg;
    j["seed_scheme"] = "replication_seed(master, rep)";
    ordered_json sc = ordered_json::object();
    for (const auto& [k, v] : scalars) {
        if (std::isfinite(v)) {
            sc[k] = v;
        } else {
            sc[k] = nullptr;
        }
    }
    j["scalars"] = sc;
    ordered_json se = ordered_json::object();
    for (const auto& [name, s] : series) {
        ordered_json rows = ordered_json::array();
        for (const auto& p : s) {
            rows.push_back({{"t", p.t}, {"estimate", p.estimate}, {"ci_low", p.ci_low}, {"ci_high", p.ci_high},
                            {"n", p.n}});
        }
        se[name] = rows;
    }
    j["series"] = se;
    ordered_json vs = ordered_json::array();
    for (const auto& v : verdicts) vs.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    j["verdicts"] = vs;
    j["passed"] = passed();
    return j.dump(2) + "\n";
}

void write_outputs(const ExperimentResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&dir](const std::string& file) {
        std::ofstream f(dir / file, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / file).string());
        return f;
    };
    {
        auto f = open("config.txt");
        f << "experiment = " << r.config.name << "\n";
        for (const auto& [k, v] : r.config.values) f << k << " = " << v << "\n";
    }
    open("summary.json") << r.summary_json();
    open("timing.json") << "{\n  \"wall_seconds\": " << fmt(r.wall_seconds) << "\n}\n";
    {
        auto f = open("seeds.csv");
        f << "rep,seed\n";
        for (std::size_t k = 0; k < r.seeds.size(); ++k) f << k << ',' << r.seeds[k] << '\n';
    }
    for (const auto& [name, s] : r.series) {
        auto f = open(name + ".csv");
        write_series_csv(f, s);
    }
    for (const auto& [name, text] : r.tables) open(name + ".csv") << text;
}

// ---------------------------------------------------------------------------

ExperimentResult cmd_duality_check(const ExperimentConfig& cfg) {
    const auto sites = cfg.integer("sites");
    if (sites < 2 || sites > 60) throw ConfigError("duality_check: sites must be in [2, 60]");
    if (cfg.horizon > 20.0) throw ConfigError("duality_check: horizon must be at most 20");
    const std::string initial = cfg.text("initial");
    if (initial == "vacant") throw ConfigError("duality_check: the duality form requires full occupancy");
    if (initial != "random" && initial != "heaviside") {
        throw ConfigError("duality_check: initial must be random, heaviside or vacant");
    }
    const Site x_min = -static_cast<Site>(sites / 2);
    const Window w{x_min, x_min + static_cast<Site>(sites) - 1, cfg.horizon};
    const double T = cfg.horizon;

    struct Row {
        std::size_t events;
        std::size_t mismatches;
        std::size_t route_mismatches;
    };
    ExperimentResult r;
    r.config = cfg;
    r.seeds = rep_seeds(cfg.seed, static_cast<std::size_t>(cfg.reps));
    const auto rows = run_reps<Row>(cfg, r.seeds.size(), [&](std::size_t k) {
        const auto h = sample_window(cfg.rates, w, r.seeds[k]);
        std::vector<State> types(w.sites());
        Stream g(derive_key(r.seeds[k], 0x494e4954));
        for (std::size_t j = 0; j < types.size(); ++j) {
            const Site x = w.x_min + static_cast<Site>(j);
            types[j] = initial == "random" ? static_cast<State>(1 + g.below(2)) : (x <= 0 ? 1 : 2);
        }
        const Configuration xi0(w.x_min, types, Alphabet::multitype);
        const auto primal = evolve_multitype(h, xi0, BoundaryPolicy::vacant).final_state();
        const auto dual = reverse(h, T);
        const auto reach = reach_sweep(dual, T);
        const auto amap = ancestor_map(dual, T);
        Row row{h.events().size(), 0, 0};
        for (Site x = w.x_min; x <= w.x_max; ++x) {
            const auto eta = ancestor_path(dual, reach, x, 0.0).terminal();
            const State expect = eta ? xi0[*eta] : 0;
            row.mismatches += primal[x] != expect;
            row.route_mismatches += amap.at(x) != eta;
        }
        return row;
    });
    std::ostringstream tab;
    tab << "rep,seed,events,mismatches,route_mismatches\n";
    std::size_t bad = 0;
    std::size_t route_bad = 0;
    std::size_t events = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        tab << k << ',' << r.seeds[k] << ',' << rows[k].events << ',' << rows[k].mismatches << ','
            << rows[k].route_mismatches << '\n';
        bad += rows[k].mismatches;
        route_bad += rows[k].route_mismatches;
        events += rows[k].events;
    }
    r.tables["replications"] = tab.str();
    r.scalars["mismatches"] = static_cast<double>(bad);
    r.scalars["route_mismatches"] = static_cast<double>(route_bad);
    r.scalars["sites_checked"] = static_cast<double>(rows.size() * w.sites());
    r.scalars["events"] = static_cast<double>(events);
    add_verdict(r, "duality_exact", bad == 0, std::to_string(bad) + " mismatches over " + std::to_string(rows.size()) +
                                                  " windows");
    add_verdict(r, "ancestor_routes_agree", route_bad == 0, std::to_string(route_bad) + " mismatches");
    return r;
}

ExperimentResult cmd_tightness(const ExperimentConfig& cfg) {
    const auto grid = scaled_grid(cfg, "t_grid", {0.125, 0.25, 0.5, 1.0});
    check_grid("t_grid", grid, cfg.horizon);
    if (grid.size() < 2) throw ConfigError("tightness: t_grid needs at least two times");
    const double q = cfg.real("quantile");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("tightness: quantile must be in (0, 1)");
    const int resamples = static_cast<int>(cfg.integer("resamples"));
    if (cfg.reps < 100) throw ConfigError("tightness: reps must be at least 100");

    ExperimentResult r;
    r.config = cfg;
    r.seeds = rep_seeds(cfg.seed, static_cast<std::size_t>(cfg.reps));
    const double t_last = grid.back();
    const int half = cfg.window.half_width(t_last);
    const auto traces = run_reps<InterfaceTrace>(cfg, r.seeds.size(), [&](std::size_t k) {
        const auto h = sample_window(cfg.rates, centered(half, t_last), r.seeds[k]);
        return run_heaviside(h, grid, cfg.window);
    });
    std::ostringstream tab;
    std::size_t flagged = 0;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        traces[k].write_csv(tab, k, r.seeds[k], k == 0);
        flagged += !traces[k].all_ok();
    }
    r.tables["traces"] = tab.str();

    Series s;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        std::vector<double> gaps;
        for (const auto& tr : traces) gaps.push_back(std::abs(static_cast<double>(tr.states[j].r - tr.states[j].l)));
        const double est = quantile(gaps, q);
        const auto [lo, hi] = bootstrap_ci(
            Sample(gaps), [q](std::span<const double> v) { return quantile(v, q); }, 0.95, resamples,
            derive_key(cfg.seed, 0x54494748, j));
        s.push_back({grid[j], est, lo, hi, gaps.size()});
    }
    r.series["gap_quantile"] = s;
    r.scalars["omega_flagged"] = static_cast<double>(flagged);
    const auto& last = s.back();
    const auto& prev = s[s.size() - 2];
    const bool inside = last.estimate >= prev.ci_low && last.estimate <= prev.ci_high;
    add_verdict(r, "no_growth", inside,
                "q(" + num(last.t) + ") = " + num(last.estimate) + ", CI at t = " + num(prev.t) + " is [" +
                    num(prev.ci_low) + ", " + num(prev.ci_high) + "]");
    return r;
}

ExperimentResult cmd_clt(const ExperimentConfig& cfg) {
    if (cfg.reps < 100) throw ConfigError("clt: reps must be at least 100");
    const int resamples = static_cast<int>(cfg.integer("resamples"));
    const double alpha = cfg.real("ks_alpha");
    ExperimentResult r;
    r.config = cfg;
    r.seeds = rep_seeds(cfg.seed, static_cast<std::size_t>(cfg.reps));
    const auto e = interface_ensemble(cfg, cfg.horizon, r.seeds.size(), cfg.seed);
    r.tables["endpoints"] = e.table;

    const Sample s(e.scaled);
    const double mean = s.mean();
    const double sd = s.sd();
    const double se = sd / std::sqrt(static_cast<double>(s.size()));
    const auto ks = ks_normal(s, 0.0, sd);
    const auto [lo, hi] = bootstrap_ci(
        s, [](std::span<const double> v) { return Sample(std::vector<double>(v.begin(), v.end())).sd(); }, 0.95,
        resamples, derive_key(cfg.seed, 0x53494749));
    r.scalars["sigma_interface"] = sd;
    r.scalars["sigma_interface_ci_low"] = lo;
    r.scalars["sigma_interface_ci_high"] = hi;
    r.scalars["mean"] = mean;
    r.scalars["standard_error"] = se;
    r.scalars["ks_statistic"] = ks.statistic;
    r.scalars["ks_p_value"] = ks.p_value;
    r.scalars["omega_flagged"] = static_cast<double>(e.flagged);
    add_verdict(r, "ks_normal", ks.p_value > alpha,
                "D = " + num(ks.statistic) + ", p = " + num(ks.p_value) + " (sigma plugged in)");
    add_verdict(r, "mean_centered", std::abs(mean) < 3.0 * se, "mean = " + num(mean) + ", SE = " + num(se));
    return r;
}

ExperimentResult cmd_fdd(const ExperimentConfig& cfg) {
    const auto a = cfg.reals("a_grid");
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!(a[j] > 0.0) || (j > 0 && !(a[j] > a[j - 1]))) throw ConfigError("fdd: a_grid must increase from > 0");
    }
    if (cfg.reps < 500) throw ConfigError("fdd: reps must be at least 500");
    std::vector<double> times;
    for (double aj : a) times.push_back(quantize_time(aj * cfg.horizon));
    if (times.back() > kMaxHorizon) throw ConfigError("fdd: a_k * horizon exceeds 4096");
    const double rho_max = cfg.real("rho_max");
    const double var_tol = cfg.real("var_tol");

    ExperimentResult r;
    r.config = cfg;
    r.seeds = rep_seeds(cfg.seed, static_cast<std::size_t>(cfg.reps));
    const double t_last = times.back();
    const int half = cfg.window.half_width(t_last);
    const auto traces = run_reps<InterfaceTrace>(cfg, r.seeds.size(), [&](std::size_t k) {
        const auto h = sample_window(cfg.rates, centered(half, t_last), r.seeds[k]);
        return run_heaviside(h, times, cfg.window);
    });
    std::ostringstream tab;
    std::vector<std::vector<double>> values;
    std::size_t flagged = 0;
    for (std::size_t k = 0; k < traces.size(); ++k) {
        traces[k].write_csv(tab, k, r.seeds[k], k == 0);
        flagged += !traces[k].all_ok();
        std::vector<double> row{0.5};
        for (const auto& st : traces[k].states) row.push_back(st.i());
        values.push_back(std::move(row));
    }
    r.tables["traces"] = tab.str();
    r.scalars["omega_flagged"] = static_cast<double>(flagged);

    // Variance per unit time of each increment.
    std::vector<double> rate;
    Series var_series;
    for (std::size_t j = 0; j < a.size(); ++j) {
        std::vector<double> inc;
        for (const auto& row : values) inc.push_back(row[j + 1] - row[j]);
        const double gap = (a[j] - (j == 0 ? 0.0 : a[j - 1])) * cfg.horizon;
        const double v = Sample(inc).variance() / gap;
        rate.push_back(v);
        var_series.push_back({times[j], v, v, v, inc.size()});
        r.scalars["increment_variance_rate_" + std::to_string(j + 1)] = v;
    }
    r.series["increment_variance_rate"] = var_series;
    const double mean_rate = std::accumulate(rate.begin(), rate.end(), 0.0) / static_cast<double>(rate.size());
    double worst = 0.0;
    for (double v : rate) worst = std::max(worst, std::abs(v / mean_rate - 1.0));
    r.scalars["variance_rate_max_deviation"] = worst;
    add_verdict(r, "variance_proportional", worst <= var_tol,
                "max relative deviation of var/gap from its mean: " + num(worst));

    const auto ind = increment_independence(values);
    if (ind) {
        double m = 0.0;
        for (std::size_t j = 0; j < ind->rho.size(); ++j) {
            r.scalars["rho_" + std::to_string(j + 1)] = ind->rho[j];
            m = std::max(m, std::abs(ind->rho[j]));
        }
        r.scalars["rho_max_abs"] = m;
        r.scalars["independence_p_value"] = ind->test.p_value;
        add_verdict(r, "increments_uncorrelated", m < rho_max, "max |rho| = " + num(m));
    } else {
        r.scalars["rho_max_abs"] = 0.0;
        add_verdict(r, "increments_uncorrelated", true, "single increment, nothing to correlate");
    }
    return r;
}

ExperimentResult cmd_sigma_dual(const ExperimentConfig& cfg) {
    if (cfg.reps < 2) throw ConfigError("sigma_dual: reps must be at least 2");
    if (!(cfg.guard < cfg.horizon - 1.0)) throw ConfigError("sigma_dual: guard must be below horizon - 1");
    const int resamples = static_cast<int>(cfg.integer("resamples"));
    const auto min_inc = static_cast<std::size_t>(cfg.integer("min_increments"));
    const double lag1_max = cfg.real("lag1_max");
    const double tol = cfg.real("tolerance");
    // A saved clt summary, read before any sampling so a bad path fails fast.
    std::optional<std::array<double, 3>> from_file;
    if (const std::string summary = cfg.text("interface_summary"); !summary.empty()) {
        std::ifstream in(summary);
        if (!in) throw ConfigError("sigma_dual: cannot open interface_summary " + summary);
        try {
            const auto j = nlohmann::json::parse(in);
            const auto& sc = j.at("scalars");
            from_file = std::array<double, 3>{sc.at("sigma_interface").get<double>(),
                                              sc.at("sigma_interface_ci_low").get<double>(),
                                              sc.at("sigma_interface_ci_high").get<double>()};
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("sigma_dual: interface_summary " + summary + ": " + e.what());
        }
    }

    ExperimentResult r;
    r.config = cfg;
    const auto d = sample_dual_paths(cfg, static_cast<std::size_t>(cfg.reps), cfg.horizon, cfg.seed);
    r.seeds = d.seeds;
    const auto g = renewal_records(d, cfg.guard);

    std::ostringstream tab;
    tab << "rep,seed,k,tau,position\n";
    tab << std::setprecision(17);
    double min_dtau = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < g.records.size(); ++j) {
        const auto& rec = g.records[j];
        for (std::size_t k = 0; k < rec.tau.size(); ++k) {
            tab << g.kept[j] << ',' << d.seeds[g.kept[j]] << ',' << k << ',' << rec.tau[k] << ',' << rec.position[k]
                << '\n';
            if (k > 0) min_dtau = std::min(min_dtau, rec.tau[k] - rec.tau[k - 1]);
        }
    }
    r.tables["renewals"] = tab.str();
    r.scalars["paths_kept"] = static_cast<double>(g.records.size());
    r.scalars["paths_rejected"] = static_cast<double>(g.rejected);
    if (g.records.empty()) {
        add_verdict(r, "paths_available", false, "every path died before horizon - guard");
        return r;
    }

    std::size_t pooled = 0;
    for (const auto& rec : g.records) pooled += rec.increments().size();
    if (pooled < 100) {
        add_verdict(r, "enough_increments", false, std::to_string(pooled) + " pooled increments, need 100 to estimate");
        return r;
    }
    const auto est = estimate_sigma(g.records, resamples, derive_key(cfg.seed, 0x44554131));
    const double lag1 = lag1_autocorrelation(g.records);
    r.scalars["sigma_dual"] = est.sigma_hat;
    r.scalars["sigma_dual_ci_low"] = est.ci_low;
    r.scalars["sigma_dual_ci_high"] = est.ci_high;
    r.scalars["increments"] = static_cast<double>(est.n_increments);
    r.scalars["mean_dtau"] = est.mean_dtau;
    r.scalars["mu_hat"] = est.mu_hat;
    r.scalars["lag1_autocorrelation"] = lag1;
    r.scalars["min_dtau"] = min_dtau;
    add_verdict(r, "enough_increments", est.n_increments >= min_inc,
                std::to_string(est.n_increments) + " pooled increments");
    add_verdict(r, "lag1_small", std::abs(lag1) <= lag1_max, "lag-1 autocorrelation " + num(lag1));
    add_verdict(r, "dtau_at_least_one", min_dtau >= 1.0, "min dtau " + num(min_dtau));

    // Interface side of the cross-check.
    double si = 0.0;
    double si_lo = 0.0;
    double si_hi = 0.0;
    if (from_file) {
        si = (*from_file)[0];
        si_lo = (*from_file)[1];
        si_hi = (*from_file)[2];
    } else {
        const auto reps = static_cast<std::size_t>(cfg.integer("interface_reps"));
        const double t = cfg.real("interface_horizon");
        if (reps < 100) throw ConfigError("sigma_dual: interface_reps must be at least 100");
        const auto e = interface_ensemble(cfg, t, reps, derive_key(cfg.seed, 0x49464143));
        const Sample s(e.scaled);
        si = s.sd();
        std::tie(si_lo, si_hi) = bootstrap_ci(
            s, [](std::span<const double> v) { return Sample(std::vector<double>(v.begin(), v.end())).sd(); },
            0.95, resamples, derive_key(cfg.seed, 0x53494749));
        r.tables["interface_endpoints"] = e.table;
    }
    r.scalars["sigma_interface"] = si;
    r.scalars["sigma_interface_ci_low"] = si_lo;
    r.scalars["sigma_interface_ci_high"] = si_hi;
    const double rel = std::abs(est.sigma_hat - si) / si;
    r.scalars["relative_difference"] = rel;
    add_verdict(r, "ci_overlap", overlaps({est.ci_low, est.ci_high}, {si_lo, si_hi}),
                "dual [" + num(est.ci_low) + ", " + num(est.ci_high) + "], interface [" + num(si_lo) + ", " +
                    num(si_hi) + "]");
    add_verdict(r, "point_estimates_close", rel < tol,
                "|sigma_dual - sigma_interface| / sigma_interface = " + num(rel));
    return r;
}

ExperimentResult cmd_regeneration(const ExperimentConfig& cfg) {
    const auto s_grid = cfg.reals("s_grid");
    const double span = cfg.real("span");
    const double K = cfg.real("threshold");
    const double p_max = cfg.real("p_max");
    const double spacing = cfg.real("spacing");
    if (!(span > 0.0)) throw ConfigError("regeneration: span must be positive");
    if (!(spacing > 0.0 && spacing <= 1.0)) throw ConfigError("regeneration: spacing must be in (0, 1]");
    if (cfg.reps < 100) throw ConfigError("regeneration: reps must be at least 100");
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
        if (s_grid[j] < 0.0 || (j > 0 && !(s_grid[j] > s_grid[j - 1]))) {
            throw ConfigError("regeneration: s_grid must be nonnegative and increasing");
        }
    }
    if (s_grid.empty() || s_grid.back() + span > cfg.horizon) {
        throw ConfigError("regeneration: need max(s_grid) + span <= horizon");
    }
    const auto grid = spaced_grid(cfg.horizon, spacing);
    for (double s : s_grid) {
        if (!std::binary_search(grid.begin(), grid.end(), s)) {
            throw ConfigError("regeneration: s values must be multiples of spacing");
        }
    }

    struct Row {
        std::vector<double> sup;
        std::vector<double> initial;
        std::vector<Site> center;
        std::vector<std::uint8_t> defined;
    };
    ExperimentResult r;
    r.config = cfg;
    r.seeds = rep_seeds(cfg.seed, static_cast<std::size_t>(cfg.reps));
    const int half = cfg.window.half_width(cfg.horizon);
    const auto rows = run_reps<Row>(cfg, r.seeds.size(), [&](std::size_t k) {
        const auto h = sample_window(cfg.rates, centered(half, cfg.horizon), r.seeds[k]);
        const auto tr = run_heaviside(h, grid, cfg.window);
        Row row;
        for (double s : s_grid) {
            if (!tr.omega_ok[tr.index_of(s)]) {
                row.sup.push_back(0.0);
                row.initial.push_back(0.0);
                row.center.push_back(0);
                row.defined.push_back(0);
                continue;
            }
            const auto c = regenerate(h, s, tr);
            std::int64_t sup = 0;
            for (std::size_t j = 0; j < c.times.size() && c.times[j] <= s + span; ++j) {
                sup = std::max(sup, c.twice_distance[j]);
            }
            row.sup.push_back(static_cast<double>(sup) / 2.0);
            row.initial.push_back(c.initial_distance());
            row.center.push_back(c.center);
            row.defined.push_back(1);
        }
        return row;
    });

    std::ostringstream tab;
    tab << "rep,seed,s,center,initial_distance,sup_distance,defined\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::size_t j = 0; j < s_grid.size(); ++j) {
            tab << k << ',' << r.seeds[k] << ',' << fmt(s_grid[j]) << ',' << rows[k].center[j] << ','
                << fmt(rows[k].initial[j]) << ',' << fmt(rows[k].sup[j]) << ',' << int(rows[k].defined[j]) << '\n';
        }
    }
    r.tables["couplings"] = tab.str();

    Series tail;
    std::size_t bad_start = 0;
    std::size_t undefined = 0;
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
        std::size_t n = 0;
        std::size_t over = 0;
        for (const auto& row : rows) {
            if (!row.defined[j]) {
                ++undefined;
                continue;
            }
            ++n;
            over += row.sup[j] > K;
            bad_start += row.initial[j] != 0.0 && row.initial[j] != 0.5;
        }
        if (n == 0) throw std::runtime_error("regeneration: i_s undefined in every replication");
        tail.push_back(proportion_point(s_grid[j], over, n));
    }
    r.series["sup_tail"] = tail;
    r.scalars["undefined_interface"] = static_cast<double>(undefined);
    r.scalars["bad_initial_distance"] = static_cast<double>(bad_start);
    bool below = true;
    bool overlap = true;
    std::string detail;
    std::string intervals;
    std::string disjoint;
    for (std::size_t j = 0; j < tail.size(); ++j) {
        below = below && tail[j].estimate <= p_max;
        for (std::size_t k = j + 1; k < tail.size(); ++k) {
            if (!overlaps({tail[j].ci_low, tail[j].ci_high}, {tail[k].ci_low, tail[k].ci_high})) {
                overlap = false;
                disjoint += " s=" + num(tail[j].t) + "/s=" + num(tail[k].t);
            }
        }
        detail += (j ? ", " : "") + std::string("s=") + num(tail[j].t) + ": " + num(tail[j].estimate);
        intervals += (j ? ", " : "") + std::string("s=") + num(tail[j].t) + ": [" + num(tail[j].ci_low) + ", " +
                     num(tail[j].ci_high) + "]";
    }
    add_verdict(r, "tail_below_p_max", below, detail);
    add_verdict(r, "uniform_in_s", overlap,
                "Clopper-Pearson 95% " + intervals + (overlap ? "" : "; disjoint:" + disjoint));
    add_verdict(r, "initial_distance", bad_start == 0, "|i^s_s - i_s| in {0, 1/2} for every defined start");
    return r;
}

ExperimentResult cmd_coalescence(const ExperimentConfig& cfg) {
    const auto x = static_cast<Site>(cfg.integer("x"));
    const auto y = static_cast<Site>(cfg.integer("y"));
    if (x == y) throw ConfigError("coalescence: x and y must differ");
    const auto pair_t = scaled_grid(cfg, "pair_t", {0.0625, 0.125, 0.25, 0.5, 1.0});
    const auto density_t = scaled_grid(cfg, "density_t", {0.0625, 0.5});
    const auto crossing_t = scaled_grid(cfg, "crossing_t", {0.125, 0.5});
    check_grid("pair_t", pair_t, cfg.horizon);
    check_grid("density_t", density_t, cfg.horizon);
    check_grid("crossing_t", crossing_t, cfg.horizon);
    std::vector<Site> probe;
    for (double p : cfg.reals("probe")) probe.push_back(static_cast<Site>(p));
    const auto density_reps = static_cast<std::size_t>(cfg.integer("density_reps"));
    const auto crossing_reps = static_cast<std::size_t>(cfg.integer("crossing_reps"));
    const double u = cfg.real("crossing_u");
    if (cfg.reps < 100 || density_reps < 100 || crossing_reps < 100) {
        throw ConfigError("coalescence: every replication count must be at least 100");
    }
    if (!(u > 0.0)) throw ConfigError("coalescence: crossing_u must be positive");
    const double target = cfg.real("slope_target");
    const double tol = cfg.real("slope_tol");
    const DualWindow dw;

    ExperimentResult r;
    r.config = cfg;
    r.seeds = rep_seeds(cfg.seed, static_cast<std::size_t>(cfg.reps));

    // Pair: running ancestors of x and y distinct at t.
    {
        const int half = dw.half_width(pair_t.back()) + std::max(std::abs(x), std::abs(y));
        const auto rows = run_reps<std::vector<bool>>(cfg, r.seeds.size(), [&](std::size_t k) {
            const auto h = sample_window(cfg.rates, centered(half, pair_t.back()), r.seeds[k]);
            return pair_distinct(h, x, y, pair_t);
        });
        std::ostringstream tab;
        tab << "rep,seed,t,distinct\n";
        std::vector<std::size_t> hits(pair_t.size(), 0);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            for (std::size_t j = 0; j < pair_t.size(); ++j) {
                tab << k << ',' << r.seeds[k] << ',' << fmt(pair_t[j]) << ',' << int(rows[k][j]) << '\n';
                hits[j] += rows[k][j];
            }
        }
        r.tables["pair"] = tab.str();
        Series s;
        std::vector<std::pair<double, double>> pts;
        for (std::size_t j = 0; j < pair_t.size(); ++j) {
            s.push_back(proportion_point(pair_t[j], hits[j], rows.size()));
            pts.emplace_back(pair_t[j], s.back().estimate);
        }
        r.series["pair_distinct"] = s;
        const bool positive = std::all_of(pts.begin(), pts.end(), [](const auto& p) { return p.second > 0.0; });
        if (positive && pts.size() >= 3) {
            const auto fit = loglog_slope(pts);
            r.scalars["pair_slope"] = fit.slope;
            r.scalars["pair_slope_std_error"] = fit.std_error;
            add_verdict(r, "pair_slope", std::abs(fit.slope - target) <= tol,
                        "log-log slope " + num(fit.slope) + " (se " + num(fit.std_error) + ")");
        } else {
            add_verdict(r, "pair_slope", false, "need at least 3 positive estimates to fit");
        }
    }

    // Density: the types started on the probe survive to t.
    {
        const std::uint64_t master = derive_key(cfg.seed, 0x44454e53);
        const auto seeds = rep_seeds(master, density_reps);
        const auto [lo, hi] = std::minmax_element(probe.begin(), probe.end());
        const int half = dw.half_width(density_t.back()) + std::max(std::abs(*lo), std::abs(*hi));
        const auto rows = run_reps<std::vector<bool>>(cfg, density_reps, [&](std::size_t k) {
            const auto p = sample_window(cfg.rates, centered(half, density_t.back()), seeds[k]);
            return probe_survives(p, probe, density_t);
        });
        std::ostringstream tab;
        tab << "rep,seed,t,hit\n";
        std::vector<std::size_t> hits(density_t.size(), 0);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            for (std::size_t j = 0; j < density_t.size(); ++j) {
                tab << k << ',' << seeds[k] << ',' << fmt(density_t[j]) << ',' << int(rows[k][j]) << '\n';
                hits[j] += rows[k][j];
            }
        }
        r.tables["density"] = tab.str();
        Series s;
        for (std::size_t j = 0; j < density_t.size(); ++j) s.push_back(proportion_point(density_t[j], hits[j], rows.size()));
        r.series["density"] = s;
        const auto& first = s.front();
        const auto& last = s.back();
        const bool drop = density_t.size() >= 2 && last.estimate < first.estimate &&
                          !overlaps({first.ci_low, first.ci_high}, {last.ci_low, last.ci_high});
        add_verdict(r, "density_decays", drop,
                    "t=" + num(first.t) + ": " + num(first.estimate) + " [" + num(first.ci_low) + ", " +
                        num(first.ci_high) + "], t=" + num(last.t) + ": " + num(last.estimate) + " [" +
                        num(last.ci_low) + ", " + num(last.ci_high) + "]");
    }

    // Crossing: eta^x overtakes eta^y by u sqrt(t) before t.
    {
        const Site a = std::min(x, y);
        const Site b = std::max(x, y);
        std::ostringstream tab;
        tab << "rep,seed,t,crossed\n";
        Series s;
        for (std::size_t j = 0; j < crossing_t.size(); ++j) {
            const double t = crossing_t[j];
            const auto seeds = rep_seeds(derive_key(cfg.seed, 0x43524f53, j), crossing_reps);
            const int half = dw.half_width(t) + std::max(std::abs(a), std::abs(b));
            const auto rows = run_reps<std::uint8_t>(cfg, crossing_reps, [&](std::size_t k) {
                const auto h = sample_window(cfg.rates, centered(half, t), seeds[k]);
                return static_cast<std::uint8_t>(crossed(h, a, b, u * std::sqrt(t), t));
            });
            std::size_t hits = 0;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                tab << k << ',' << seeds[k] << ',' << fmt(t) << ',' << int(rows[k]) << '\n';
                hits += rows[k];
            }
            s.push_back(proportion_point(t, hits, rows.size()));
        }
        r.tables["crossing"] = tab.str();
        r.series["crossing"] = s;
        if (s.size() >= 2 && s.back().estimate > 0.0) {
            r.scalars["crossing_ratio_first_last"] = s.front().estimate / s.back().estimate;
        }
    }
    return r;
}

ExperimentResult cmd_truncation(const ExperimentConfig& cfg) {
    const double spacing = cfg.real("spacing");
    const double max_fraction = cfg.real("max_fraction");
    const auto guards = cfg.reals("guards");
    const auto dual_reps = static_cast<std::size_t>(cfg.integer("dual_reps"));
    const double dual_horizon = cfg.real("dual_horizon");
    const double guard_tol = cfg.real("guard_tol");
    if (!(spacing > 0.0 && spacing <= 1.0)) throw ConfigError("truncation: spacing must be in (0, 1]");
    if (guards.empty()) throw ConfigError("truncation: guards must be nonempty");
    for (double g : guards) {
        if (!(g >= 0.0 && g < dual_horizon - 1.0)) throw ConfigError("truncation: guard outside [0, dual_horizon - 1)");
    }
    if (!(dual_horizon > 0.0) || dual_horizon > kMaxHorizon) throw ConfigError("truncation: bad dual_horizon");
    if (dual_reps < 2) throw ConfigError("truncation: dual_reps must be at least 2");

    ExperimentResult r;
    r.config = cfg;
    r.seeds = rep_seeds(cfg.seed, static_cast<std::size_t>(cfg.reps));
    const auto grid = spaced_grid(cfg.horizon, spacing);
    const int W = cfg.window.half_width(cfg.horizon);
    struct Row {
        bool differs;
        double first;
    };
    const auto rows = run_reps<Row>(cfg, r.seeds.size(), [&](std::size_t k) {
        const auto h1 = sample_window(cfg.rates, centered(W, cfg.horizon), r.seeds[k]);
        const auto h2 = sample_window(cfg.rates, centered(2 * W, cfg.horizon), r.seeds[k]);
        const auto a = run_heaviside(h1, grid, cfg.window);
        const auto b = run_heaviside(h2, grid, cfg.window);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            if (a.states[j] != b.states[j]) return Row{true, grid[j]};
        }
        return Row{false, std::nan("")};
    });
    std::ostringstream tab;
    tab << "rep,seed,differs,first_difference\n";
    std::size_t differ = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        tab << k << ',' << r.seeds[k] << ',' << int(rows[k].differs) << ','
            << (rows[k].differs ? fmt(rows[k].first) : std::string("")) << '\n';
        differ += rows[k].differs;
    }
    r.tables["pairs"] = tab.str();
    const double frac = static_cast<double>(differ) / static_cast<double>(rows.size());
    r.scalars["half_width"] = W;
    r.scalars["differing_fraction"] = frac;
    r.series["differing"] = {proportion_point(cfg.horizon, differ, rows.size())};
    add_verdict(r, "w_vs_2w", frac < max_fraction,
                std::to_string(differ) + " of " + std::to_string(rows.size()) + " replications differ");

    // Guard sensitivity of the renewal estimate, one path set for every guard.
    const auto d = sample_dual_paths(cfg, dual_reps, dual_horizon, derive_key(cfg.seed, 0x47554152));
    Series sig;
    std::ostringstream gt;
    gt << "rep,seed,guard,kept\n";
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = 0; j < guards.size(); ++j) {
        const auto g = renewal_records(d, guards[j]);
        std::set<std::size_t> kept(g.kept.begin(), g.kept.end());
        for (std::size_t k = 0; k < d.seeds.size(); ++k) {
            gt << k << ',' << d.seeds[k] << ',' << fmt(guards[j]) << ',' << int(kept.count(k)) << '\n';
        }
        if (g.records.empty()) throw std::runtime_error("truncation: every dual path died before the guard band");
        const auto est = estimate_sigma(g.records, 2000, derive_key(cfg.seed, 0x44554131));
        sig.push_back({guards[j], est.sigma_hat, est.ci_low, est.ci_high, est.n_increments});
        lo = std::min(lo, est.sigma_hat);
        hi = std::max(hi, est.sigma_hat);
    }
    r.tables["guard_paths"] = gt.str();
    r.series["sigma_by_guard"] = sig;
    const double spread = (hi - lo) / lo;
    r.scalars["guard_spread"] = spread;
    add_verdict(r, "guard_sensitivity", spread < guard_tol, "(max - min) / min of sigma_dual = " + num(spread));
    return r;
}

ExperimentResult cmd_survival(const ExperimentConfig& cfg) {
    const auto grid = cfg.reals("t_grid");
    check_grid("t_grid", grid, cfg.horizon);
    SplittingPlan plan;
    plan.level_step = cfg.real("level_step");
    plan.beta = cfg.real("beta");
    plan.gamma = cfg.real("gamma");
    plan.gamma_until = cfg.real("gamma_until");
    const auto cap = cfg.integer("cap");
    if (cap < 2) throw ConfigError("survival: cap must be at least 2");
    plan.cap = static_cast<std::size_t>(cap);
    if (!(plan.level_step > 0.0)) throw ConfigError("survival: level_step must be positive");
    if (cfg.reps < 100) throw ConfigError("survival: reps must be at least 100");

    ExperimentResult r;
    r.config = cfg;
    r.seeds = rep_seeds(cfg.seed, static_cast<std::size_t>(cfg.reps));
    const auto trees = run_reps<SplitSurvival>(
        cfg, r.seeds.size(), [&](std::size_t k) { return split_survival(cfg.rates, cfg.horizon, r.seeds[k], plan); });

    std::ostringstream tab;
    tab << "rep,seed,runs,capped,deaths";
    for (double t : grid) tab << ",tail_" << fmt(t);
    tab << '\n' << std::setprecision(17);
    std::vector<std::vector<double>> tails(grid.size());
    std::size_t runs = 0;
    std::size_t capped = 0;
    for (std::size_t k = 0; k < trees.size(); ++k) {
        tab << k << ',' << r.seeds[k] << ',' << trees[k].runs << ',' << trees[k].capped << ','
            << trees[k].deaths.size();
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double v = trees[k].tail(grid[j]);
            tails[j].push_back(v);
            tab << ',' << v;
        }
        tab << '\n';
        runs += trees[k].runs;
        capped += trees[k].capped;
    }
    r.tables["trees"] = tab.str();
    r.scalars["lazy_runs"] = static_cast<double>(runs);
    r.scalars["capped_runs"] = static_cast<double>(capped);

    Series s;
    std::vector<std::pair<double, double>> pts;
    bool positive = true;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const Sample v(tails[j]);
        const double m = v.mean();
        const double se = v.sd() / std::sqrt(static_cast<double>(v.size()));
        s.push_back({grid[j], m, std::max(0.0, m - 1.959963984540054 * se), m + 1.959963984540054 * se, v.size()});
        pts.emplace_back(grid[j], m);
        positive = positive && m > 0.0;
    }
    r.series["tail"] = s;
    bool decreasing = true;
    std::string values;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j > 0) decreasing = decreasing && s[j].estimate < s[j - 1].estimate;
        values += (j ? ", " : "") + num(s[j].t) + ": " + num(s[j].estimate);
    }
    add_verdict(r, "strictly_decreasing", decreasing, "P[t < T < horizon] at " + values);
    if (positive && pts.size() >= 3) {
        const auto fit = loglinear_slope(pts);
        r.scalars["loglinear_slope"] = fit.slope;
        r.scalars["loglinear_slope_std_error"] = fit.std_error;
        add_verdict(r, "negative_slope", fit.slope < 0.0, "slope of log P against t: " + num(fit.slope));
    } else {
        add_verdict(r, "negative_slope", false, "need at least 3 positive estimates to fit");
    }
    return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    static const std::map<std::string, ExperimentResult (*)(const ExperimentConfig&)> table{
        {"duality_check", cmd_duality_check}, {"tightness", cmd_tightness},       {"clt", cmd_clt},
        {"fdd", cmd_fdd},                     {"sigma_dual", cmd_sigma_dual},     {"regeneration", cmd_regeneration},
        {"coalescence", cmd_coalescence},     {"truncation", cmd_truncation},     {"survival", cmd_survival},
    };
    const auto it = table.find(cfg.name);
    if (it == table.end()) throw ConfigError("unknown experiment '" + cfg.name + "'");
    const auto start = std::chrono::steady_clock::now();
    auto result = it->second(cfg);
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace cil
