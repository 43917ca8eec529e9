#include "hetheat/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hetheat/chaos.hpp"
#include "hetheat/config.hpp"
#include "hetheat/covariance.hpp"
#include "hetheat/errors.hpp"
#include "hetheat/kernel.hpp"
#include "hetheat/plot.hpp"
#include "hetheat/quadvar.hpp"
#include "hetheat/sampler.hpp"

namespace hetheat {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const std::vector<std::string> kSubcommands = {"kernel-table", "conditions", "covariance", "sample",
                                               "clt",          "asclt",      "diagnostics", "all"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
    return out;
}

double to_double(const std::string& s, const char* field) {
    std::size_t used = 0;
    try {
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(field, "not a number: '" + s + "'");
}

int to_int(const std::string& s, const char* field) {
    std::size_t used = 0;
    try {
        const long v = std::stol(s, &used);
        if (used == s.size() && v >= INT32_MIN && v <= INT32_MAX) return static_cast<int>(v);
    } catch (const std::exception&) {
    }
    throw ValidationError(field, "not an integer: '" + s + "'");
}

// Collects the files of one run in a scratch directory and moves it into place at the end.
class RunWriter {
public:
    RunWriter(fs::path final_dir) : final_(std::move(final_dir)) {
        std::random_device rd;
        char buf[32];
        std::snprintf(buf, sizeof buf, ".tmp-%08x", rd());
        scratch_ = final_.parent_path() / (final_.filename().string() + buf);
        fs::create_directories(scratch_);
    }

    ~RunWriter() {
        std::error_code ec;
        if (!committed_) fs::remove_all(scratch_, ec);
    }

    fs::path path(const std::string& name) const { return scratch_ / name; }

    void write(const std::string& name, const std::string& content) {
        std::ofstream out(path(name), std::ios::binary);
        if (!out) throw IoError("cannot write " + path(name).string());
        out << content;
        if (!out) throw IoError("short write to " + path(name).string());
    }

    // Different subcommands share a run directory, so an existing one is updated file by file.
    void commit() {
        if (!fs::exists(final_)) {
            fs::rename(scratch_, final_);
        } else {
            for (const auto& entry : fs::directory_iterator(scratch_)) {
                fs::rename(entry.path(), final_ / entry.path().filename());
            }
            fs::remove_all(scratch_);
        }
        committed_ = true;
    }

private:
    fs::path final_;
    fs::path scratch_;
    bool committed_ = false;
};

struct Context {
    const ExperimentConfig& cfg;
    PiecewiseKernel kernel;
    QuadratureSpec q;
    GramCache& cache;
    RunWriter& writer;
    nlohmann::json& report;
    std::string hash;
};

std::string tag(const Context& c) { return std::to_string(c.cfg.seed) + "," + c.hash; }

void run_kernel_table(Context& c) {
    const Medium& m = c.kernel.medium();
    std::ostringstream csv;
    csv << "u,x,z,f_z,e_minus,e_plus,weight,green,heat_kernel,seed,config_hash\n";
    const auto& zr = c.cfg.z_range;
    const auto count = static_cast<long>(std::floor((zr.hi - zr.lo) / zr.step + 1e-9));
    for (long i = 0; i <= count; ++i) {
        const double z = zr.lo + static_cast<double>(i) * zr.step;
        const double weight = 1.0 / std::sqrt(z <= 0.0 ? m.a1 : m.a2);
        csv << fmt(c.cfg.u) << ',' << fmt(c.cfg.x) << ',' << fmt(z) << ',' << fmt(f_map(m, z)) << ','
            << fmt(e_minus(m, c.cfg.u, c.cfg.x, z)) << ',' << fmt(e_plus(m, c.cfg.u, c.cfg.x, z)) << ','
            << fmt(weight) << ',' << fmt(green_fn(m, c.cfg.u, c.cfg.x, z)) << ','
            << fmt(heat_kernel(c.cfg.u, z - c.cfg.x)) << ',' << tag(c) << '\n';
    }
    c.writer.write("kernel_table.csv", csv.str());
    c.report["kernel"] = {{"beta", m.beta}, {"satisfies_crhoa", m.satisfies_crhoa}};
}

void run_conditions(Context& c) {
    const std::vector<double> h = default_h_grid();
    std::ostringstream csv;
    csv << "condition,h,ratio,constant,ratio_slope,pass,seed,config_hash\n";
    nlohmann::json summary = nlohmann::json::array();
    for (Condition id : {Condition::H1, Condition::H2, Condition::H3}) {
        const ConditionReport r = verify_condition(c.kernel, c.cfg.t, id, h, c.q);
        for (std::size_t i = 0; i < h.size(); ++i) {
            csv << to_string(id) << ',' << fmt(h[i]) << ',' << fmt(r.ratio_per_h[i]) << ',' << fmt(r.constant) << ','
                << fmt(r.ratio_slope) << ',' << (r.pass ? "true" : "false") << ',' << tag(c) << '\n';
        }
        summary.push_back({{"condition", to_string(id)}, {"constant", r.constant}, {"pass", r.pass}});
    }
    c.writer.write("conditions.csv", csv.str());

    const std::vector<double> ts{c.cfg.t / 8, c.cfg.t / 4, c.cfg.t / 2, c.cfg.t};
    const std::vector<double> xs{0.0, 0.25, 0.5, 0.75, 1.0};
    const SupVarianceReport sv = sup_variance_check(c.kernel, ts, xs, c.q);
    std::ostringstream vcsv;
    vcsv << "t,x,variance,seed,config_hash\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            vcsv << fmt(ts[i]) << ',' << fmt(xs[j]) << ',' << fmt(sv.values[i][j]) << ',' << tag(c) << '\n';
        }
    }
    c.writer.write("sup_variance.csv", vcsv.str());

    std::vector<double> tgrid, xygrid;
    for (int i = 1; i <= 10; ++i) tgrid.push_back(c.cfg.t * i / 10.0);
    for (int i = 0; i <= 40; ++i) xygrid.push_back(-2.0 + 0.1 * i);
    const GaussianBound gb = gaussian_bound_fit(c.kernel.medium(), tgrid, xygrid);

    c.report["conditions"] = {
        {"summary", summary},
        {"sup_variance", sv.sup},
        {"c4", sv.c4},
        {"monotone_in_t", sv.monotone_in_t},
        {"lower_bound_constant", lemma_lower_constant(c.kernel.medium(), c.cfg.t, 1.0)},
        {"gaussian_bound", {{"c1", gb.c1}, {"c2", gb.c2}}}};
}

void run_covariance(Context& c) {
    std::ostringstream csv;
    csv << "x,y,cov,seed,config_hash\n";
    for (int i = 0; i <= 8; ++i) {
        for (int j = i; j <= 8; ++j) {
            const double x = i / 8.0, y = j / 8.0;
            csv << fmt(x) << ',' << fmt(y) << ',' << fmt(cov_field(c.kernel, c.cfg.t, x, y, c.q)) << ',' << tag(c)
                << '\n';
        }
    }
    c.writer.write("covariance.csv", csv.str());

    const std::vector<double> h = default_h_grid();
    std::vector<double> var;
    for (double hh : h) var.push_back(increment_variance(c.kernel, c.cfg.t, 0.5, 0.5 + hh, c.q));
    std::vector<double> lh, lv;
    for (std::size_t i = 0; i < h.size(); ++i) {
        lh.push_back(std::log(h[i]));
        lv.push_back(std::log(var[i]));
    }
    const double slope = ls_slope(lh, lv);
    std::ostringstream vcsv;
    vcsv << "h,increment_variance,slope,holder,seed,config_hash\n";
    for (std::size_t i = 0; i < h.size(); ++i) {
        vcsv << fmt(h[i]) << ',' << fmt(var[i]) << ',' << fmt(slope) << ',' << fmt(slope / 2) << ',' << tag(c) << '\n';
    }
    c.writer.write("variogram.csv", vcsv.str());
    emit_plot({{"E(u(t,1/2+h)-u(t,1/2))^2", h, var}}, PlotKind::LogLog, c.writer.path("variogram.svg"),
              {"Variogram", "h", "increment variance"});
    c.report["covariance"] = {{"variogram_slope", slope}, {"holder", slope / 2}};
}

void run_sample(Context& c) {
    const int n = c.cfg.n_list.front();
    const IncrementGram gram = build_gram(c.kernel, c.cfg.t, n, c.q, &c.cache);
    const CholeskyFactor factor(gram);
    const auto samples = cholesky_sample(factor, sub_seed(c.cfg.seed, static_cast<std::uint64_t>(n)),
                                         c.cfg.sample_replicas);
    std::ostringstream csv;
    write_samples_csv(csv, samples, c.hash);
    c.writer.write("samples.csv", csv.str());
    c.report["sample"] = {{"n", n}, {"replicas", c.cfg.sample_replicas}, {"jitter", factor.jitter()}};
}

void run_clt(Context& c) {
    const CltReport r = clt_experiment(c.kernel, c.cfg.t, c.cfg.n_list, c.cfg.m_replicas, c.cfg.seed, c.q, &c.cache);
    std::ostringstream csv;
    write_clt_csv(csv, r, c.cfg.seed, c.hash);
    c.writer.write("clt.csv", csv.str());
    Series ks{"KS distance", {}, {}}, be{"Berry-Esseen value", {}, {}};
    for (const auto& row : r.rows) {
        ks.x.push_back(row.n);
        ks.y.push_back(row.ks);
        be.x.push_back(row.n);
        be.y.push_back(row.be_value);
    }
    emit_plot({ks, be}, PlotKind::LogLog, c.writer.path("clt_ks.svg"), {"Normal approximation", "N", "distance"});
    c.report["clt"] = {{"ks_slope", r.ks_slope}, {"be_slope", r.be_slope}, {"ks_null", r.ks_null}};
}

void run_asclt(Context& c) {
    const AscltReport r =
        asclt_experiment(c.kernel, c.cfg.t, c.cfg.K, shipped_test_functions(), c.cfg.paths, c.cfg.seed, c.q, &c.cache);
    std::ostringstream csv;
    write_asclt_csv(csv, r, c.cfg.seed, c.hash);
    c.writer.write("asclt.csv", csv.str());
    std::vector<Series> series;
    for (std::size_t f = 0; f < r.names.size(); ++f) {
        Series s{r.names[f] + " (path 0) - target", {}, {}};
        for (std::size_t k = 0; k < r.paths.front().averages[f].size(); ++k) {
            s.x.push_back(static_cast<double>(k + 1));
            s.y.push_back(r.paths.front().averages[f][k] - r.targets[f]);
        }
        series.push_back(std::move(s));
    }
    emit_plot(series, PlotKind::Line, c.writer.path("asclt.svg"),
              {"Lacunary log-average minus E phi(Z)", "k (N = 2^k)", "A_k - E phi(Z)"});
    c.report["asclt"] = {{"note", "lacunary check over N = 2^k with uniform weights"}, {"K", r.K}};
}

void run_diagnostics(Context& c) {
    std::vector<ChaosDiag> rows;
    for (int n : c.cfg.n_list) rows.push_back(chaos_diagnostics(build_gram(c.kernel, c.cfg.t, n, c.q, &c.cache)));
    std::ostringstream csv;
    write_chaos_csv(csv, rows, c.cfg.seed, c.hash);
    c.writer.write("chaos.csv", csv.str());

    const AscltHypotheses h = asclt_hypotheses(build_gram(c.kernel, c.cfg.t, 1 << c.cfg.K, c.q, &c.cache));
    std::ostringstream hcsv;
    hcsv << "l,contraction,l_times_contraction,cond3_partial,cond4_partial,e_gg_diag,seed,config_hash\n";
    for (std::size_t i = 0; i < h.levels.size(); ++i) {
        const auto a = static_cast<Eigen::Index>(i);
        hcsv << h.levels[i] << ',' << fmt(h.contraction[i]) << ',' << fmt(h.l_times_contraction[i]) << ','
             << fmt(h.cond3_partial[i]) << ',' << fmt(h.cond4_partial[i]) << ',' << fmt(h.cross(a, a)) << ','
             << tag(c) << '\n';
    }
    c.writer.write("asclt_hypotheses.csv", hcsv.str());
    std::ostringstream xcsv;
    xcsv << "i,j,e_gi_gj,seed,config_hash\n";
    for (std::size_t a = 0; a < h.levels.size(); ++a) {
        for (std::size_t b = 0; b < h.levels.size(); ++b) {
            xcsv << h.levels[a] << ',' << h.levels[b] << ','
                 << fmt(h.cross(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) << ',' << tag(c) << '\n';
        }
    }
    c.writer.write("asclt_cross.csv", xcsv.str());
    c.report["diagnostics"] = {{"note", "ASCLT sums restricted to dyadic indices"}};
}

void print_error(std::ostream& err, const nlohmann::json& j) { err << j.dump() << '\n'; }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"hetheat: quadratic variations of the stochastic heat equation in a two-phase medium"};
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "run an experiment");
    std::string sub, config_path, medium, n_list, z_range;
    std::map<std::string, std::string> scalars;
    run->add_option("subcommand", sub, "kernel-table|conditions|covariance|sample|clt|asclt|diagnostics|all")
        ->required()
        ->check(CLI::IsMember(kSubcommands));
    run->add_option("--config", config_path, "JSON configuration file; flags override it");
    run->add_option("--medium", medium, "a1,a2,rho1,rho2");
    run->add_option("--n", n_list, "comma-separated grid sizes");
    run->add_option("--z-range", z_range, "lo:hi:step for kernel-table");
    for (const char* name : {"t", "t-max", "m", "K", "paths", "sample-replicas", "seed", "u", "x", "rel-tol",
                             "abs-tol", "max-subdivisions", "output", "cache"}) {
        run->add_option(std::string("--") + name, scalars[name]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        print_error(err, {{"error", "validation"}, {"field", "arguments"}, {"message", e.what()}});
        return 2;
    }

    ExperimentConfig cfg;
    std::string hash;
    try {
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        if (!medium.empty()) {
            const auto parts = split(medium, ',');
            if (parts.size() != 4) throw ValidationError("medium", "expected a1,a2,rho1,rho2");
            for (std::size_t i = 0; i < 4; ++i) cfg.medium[i] = to_double(parts[i], "medium");
        }
        if (!n_list.empty()) {
            cfg.n_list.clear();
            for (const auto& p : split(n_list, ',')) cfg.n_list.push_back(to_int(p, "n_list"));
        }
        if (!z_range.empty()) cfg.z_range = parse_z_range(z_range);
        auto set = [&](const char* name, const std::function<void(const std::string&)>& apply) {
            if (!scalars[name].empty()) apply(scalars[name]);
        };
        set("t", [&](const std::string& s) { cfg.t = to_double(s, "t"); });
        set("t-max", [&](const std::string& s) { cfg.t_max = to_double(s, "t_max"); });
        set("m", [&](const std::string& s) { cfg.m_replicas = to_int(s, "m"); });
        set("K", [&](const std::string& s) { cfg.K = to_int(s, "K"); });
        set("paths", [&](const std::string& s) { cfg.paths = to_int(s, "paths"); });
        set("sample-replicas", [&](const std::string& s) { cfg.sample_replicas = to_int(s, "sample_replicas"); });
        set("seed", [&](const std::string& s) {
            std::size_t used = 0;
            try {
                cfg.seed = std::stoull(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != s.size() || s.empty() || s[0] == '-') throw ValidationError("seed", "not a 64-bit integer");
        });
        set("u", [&](const std::string& s) { cfg.u = to_double(s, "u"); });
        set("x", [&](const std::string& s) { cfg.x = to_double(s, "x"); });
        set("rel-tol", [&](const std::string& s) { cfg.rel_tol = to_double(s, "rel_tol"); });
        set("abs-tol", [&](const std::string& s) { cfg.abs_tol = to_double(s, "abs_tol"); });
        set("max-subdivisions", [&](const std::string& s) { cfg.max_subdivisions = to_int(s, "max_subdivisions"); });
        set("output", [&](const std::string& s) { cfg.output_dir = s; });
        set("cache", [&](const std::string& s) { cfg.cache_dir = s; });
        cfg.validate();
        hash = cfg.hash();
    } catch (const ValidationError& e) {
        print_error(err, {{"error", "validation"}, {"field", e.field()}, {"message", e.what()}});
        return 2;
    }

    const fs::path run_dir = fs::path(cfg.output_dir) / cfg.run_id();
    try {
        GramCache cache(GramCache::default_dir(cfg.cache_dir));
        RunWriter writer(run_dir);
        nlohmann::json report;
        report["config"] = cfg.to_json();
        report["config_hash"] = hash;
        report["run_id"] = cfg.run_id();
        report["subcommand"] = sub;
        Context ctx{cfg, PiecewiseKernel(cfg.make_medium()), cfg.quadrature(), cache, writer, report, hash};

        const std::vector<std::pair<std::string, void (*)(Context&)>> steps = {
            {"kernel-table", run_kernel_table}, {"conditions", run_conditions}, {"covariance", run_covariance},
            {"sample", run_sample},             {"clt", run_clt},               {"asclt", run_asclt},
            {"diagnostics", run_diagnostics}};
        nlohmann::json timings;
        for (const auto& [name, fn] : steps) {
            if (sub != "all" && sub != name) continue;
            const auto start = Clock::now();
            fn(ctx);
            timings[name] = std::chrono::duration<double>(Clock::now() - start).count();
            out << name << " done\n";
        }
        report["timings_s"] = timings;
        report["cache"] = {{"dir", cache.dir().string()}, {"hits", cache.hits()}, {"misses", cache.misses()}};
        writer.write(sub == "all" ? "report.json" : "report_" + sub + ".json", report.dump(2) + "\n");
        writer.commit();
        out << run_dir.string() << '\n';
        return 0;
    } catch (const ValidationError& e) {
        print_error(err, {{"error", "validation"}, {"field", e.field()}, {"message", e.what()}});
        return 2;
    } catch (const NumericError& e) {
        print_error(err, {{"error", "numeric"}, {"module", e.module()}, {"op", e.op()}, {"message", e.what()}});
        return 3;
    } catch (const DomainError& e) {
        print_error(err, {{"error", "numeric"}, {"module", "kernel"}, {"op", "domain"}, {"message", e.what()}});
        return 3;
    } catch (const IoError& e) {
        print_error(err, {{"error", "io"}, {"message", e.what()}});
        return 4;
    } catch (const fs::filesystem_error& e) {
        print_error(err, {{"error", "io"}, {"message", e.what()}});
        return 4;
    }
}

}  // namespace hetheat
