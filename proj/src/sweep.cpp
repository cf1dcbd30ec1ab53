#include "pqrlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "pqrlab/graph.hpp"
#include "pqrlab/rng.hpp"

namespace pqrlab {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

SlopeFit try_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    try {
        return fit_slope(xs, ys);
    } catch (const std::exception& e) {
        SlopeFit f;
        f.valid = false;
        f.points = static_cast<int>(xs.size());
        f.note = e.what();
        return f;
    }
}

nlohmann::json slope_to_json(const SlopeFit& f) {
    if (!f.valid) return {{"note", f.note.empty() ? "insufficient points" : f.note}};
    return {{"slope", f.slope},
            {"intercept", f.intercept},
            {"stderr", f.stderr_slope},
            {"points", f.points}};
}

} // namespace

std::string to_string(SweepMode m) {
    switch (m) {
        case SweepMode::EpsilonContinuum: return "epsilon-continuum";
        case SweepMode::EpsilonDiscrete: return "epsilon-discrete";
        case SweepMode::NDiscrete: return "n-discrete";
        case SweepMode::OmegaDiscrete: return "omega-discrete";
    }
    return "?";
}

SweepMode sweep_mode_from_string(const std::string& s) {
    if (s == "epsilon-continuum") return SweepMode::EpsilonContinuum;
    if (s == "epsilon-discrete") return SweepMode::EpsilonDiscrete;
    if (s == "n-discrete") return SweepMode::NDiscrete;
    if (s == "omega-discrete") return SweepMode::OmegaDiscrete;
    throw ConfigError("unknown sweep mode: " + s);
}

void SweepConfig::validate() const {
    params.validate();
    if (sweep_values.empty()) throw ConfigError("sweep: empty value list");
    if (sweep_values.size() > 1) {
        const bool desc = sweep_values[1] < sweep_values[0];
        for (std::size_t i = 1; i < sweep_values.size(); ++i) {
            const bool step_desc = sweep_values[i] < sweep_values[i - 1];
            if (step_desc != desc || sweep_values[i] == sweep_values[i - 1])
                throw ConfigError("sweep: values must be strictly monotone");
        }
    }
    if (trials < 1) throw ConfigError("sweep: trials must be >= 1");
    if (k_eigen < 2) throw ConfigError("sweep: k_eigen must be >= 2");
    if (mode == SweepMode::NDiscrete)
        for (const double v : sweep_values)
            if (v < 2.0 || v != std::floor(v))
                throw ConfigError("sweep: NDiscrete values must be integer vertex counts >= 2");
    if (mode != SweepMode::EpsilonContinuum && n_vertices < 2 && mode != SweepMode::NDiscrete)
        throw ConfigError("sweep: n_vertices must be >= 2");
}

int SweepConfig::target_clusters() const {
    switch (density_template.variant()) {
        case DensityVariant::ErfClusters:
        case DensityVariant::MollifiedIndicator:
            return static_cast<int>(density_template.clusters().size());
        case DensityVariant::PiecewiseConstant:
        case DensityVariant::ExpMixture:
            return 2;
    }
    return 2;
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
    SweepConfig c;
    c.mode = sweep_mode_from_string(j.at("mode").get<std::string>());
    c.params.p = j.at("p").get<double>();
    c.params.q = j.at("q").get<double>();
    c.params.r = j.at("r").get<double>();
    c.density_template = DensityModel::from_json(j.at("density"));
    c.sweep_values = j.at("sweep_values").get<std::vector<double>>();
    c.n_vertices = j.value("n_vertices", c.n_vertices);
    c.n_cells = j.value("n_cells", c.n_cells);
    c.trials = j.value("trials", c.trials);
    c.k_eigen = j.value("k_eigen", c.k_eigen);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.fit_window_max = j.value("fit_window_max", c.fit_window_max);
    if (j.contains("kernel_profile"))
        c.kernel_profile = kernel_profile_from_string(j["kernel_profile"].get<std::string>());
    c.jobs = j.value("jobs", c.jobs);
    c.solver_tol = j.value("solver_tol", c.solver_tol);
    return c;
}

nlohmann::json SweepConfig::to_json() const {
    return {{"mode", to_string(mode)},
            {"p", params.p},
            {"q", params.q},
            {"r", params.r},
            {"theory_valid", params.theory_valid()},
            {"density", density_template.to_json()},
            {"sweep_values", sweep_values},
            {"n_vertices", n_vertices},
            {"n_cells", n_cells},
            {"trials", trials},
            {"k_eigen", k_eigen},
            {"base_seed", base_seed},
            {"fit_window_max", fit_window_max},
            {"kernel_profile", to_string(kernel_profile)},
            {"jobs", jobs},
            {"solver_tol", solver_tol}};
}

SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw ConfigError("fit_slope: mismatched lengths");
    if (xs.size() < 3) throw ConfigError("fit_slope: insufficient points (need >= 3)");
    const int n = static_cast<int>(xs.size());
    std::vector<double> lx(n), ly(n);
    for (int i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw ConfigError("fit_slope: values must be positive for a log-log fit");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("fit_slope: degenerate abscissae");

    SlopeFit f;
    f.valid = true;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = ly[i] - (f.intercept + f.slope * lx[i]);
        ss_res += e * e;
    }
    f.stderr_slope = n > 2 ? std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
    return f;
}

namespace {

std::vector<double> run_discrete_cell(const DensityModel& model, const SweepConfig& config,
                                      int n_vertices, std::uint64_t seed) {
    const auto batch = model.sample(n_vertices, seed);
    const double delta = delta_rule(n_vertices);
    const KernelSpec kernel(config.kernel_profile, delta, batch.dim);
    const auto graph = reweight(build_raw_graph(batch, kernel), config.params.q);
    const auto system = assemble(graph, config.params);
    const auto spec = solve_lowest(system, config.k_eigen, config.solver_tol);
    const double factor = continuum_scale(config.params, kernel, n_vertices, delta);
    std::vector<double> sigmas(config.k_eigen);
    for (int j = 0; j < config.k_eigen; ++j) sigmas[j] = spec.eigenvalues[j] * factor;
    return sigmas;
}

std::vector<double> run_continuum_cell(const DensityModel& model, const SweepConfig& config) {
    const StructuredMesh mesh(model.domain(), config.n_cells);
    const auto system = assemble_continuum(mesh, model, config.params);
    const auto spec = solve_continuum(system, config.k_eigen, config.solver_tol);
    return {spec.eigenvalues.data(), spec.eigenvalues.data() + config.k_eigen};
}

} // namespace

SweepResult run_sweep(const SweepConfig& config) {
    config.validate();

    SweepResult result;
    result.config = config;
    result.K = config.target_clusters();
    result.values = config.sweep_values;

    const bool continuum = config.mode == SweepMode::EpsilonContinuum;
    const int trials = continuum ? 1 : config.trials;
    const std::size_t n_values = result.values.size();

    // Densities are built once per sweep value and shared across trials.
    std::vector<DensityModel> models;
    models.reserve(n_values);
    for (const double v : result.values) {
        if (config.mode == SweepMode::NDiscrete)
            models.push_back(config.density_template);
        else
            models.push_back(config.density_template.with_scale(v));
    }

    result.cells.assign(n_values, std::vector<SweepCell>(trials));
    std::vector<std::pair<int, int>> tasks;
    for (std::size_t vi = 0; vi < n_values; ++vi)
        for (int t = 0; t < trials; ++t) tasks.emplace_back(static_cast<int>(vi), t);

    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t id = cursor.fetch_add(1);
            if (id >= tasks.size()) return;
            const auto [vi, trial] = tasks[id];
            SweepCell& cell = result.cells[vi][trial];
            cell.value = result.values[vi];
            cell.trial = trial;
            try {
                if (continuum) {
                    cell.sigmas = run_continuum_cell(models[vi], config);
                } else {
                    const int n = config.mode == SweepMode::NDiscrete
                                      ? static_cast<int>(result.values[vi])
                                      : config.n_vertices;
                    const std::uint64_t seed =
                        mix_seed(config.base_seed, static_cast<std::uint64_t>(vi),
                                 static_cast<std::uint64_t>(trial));
                    cell.sigmas = run_discrete_cell(models[vi], config, n, seed);
                }
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.ok = false;
                cell.error = e.what();
            }
        }
    };

    const int jobs = std::max(1, config.jobs);
    if (jobs == 1 || tasks.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min<int>(jobs, static_cast<int>(tasks.size())); ++t)
            pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::size_t failed = 0;
    for (const auto& row : result.cells)
        for (const auto& cell : row)
            if (!cell.ok) ++failed;
    if (2 * failed > tasks.size()) {
        std::string first;
        for (const auto& row : result.cells)
            for (const auto& cell : row)
                if (!cell.ok && first.empty()) first = cell.error;
        throw NumericsError("sweep: more than half of the cells failed; first error: " + first);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    result.means.assign(n_values, std::vector<double>(config.k_eigen, nan));
    for (std::size_t vi = 0; vi < n_values; ++vi) {
        int ok = 0;
        std::vector<double> acc(config.k_eigen, 0.0);
        for (const auto& cell : result.cells[vi])
            if (cell.ok) {
                ++ok;
                for (int j = 0; j < config.k_eigen; ++j) acc[j] += cell.sigmas[j];
            }
        if (ok > 0)
            for (int j = 0; j < config.k_eigen; ++j) result.means[vi][j] = acc[j] / ok;
    }

    // slope fits over the window (all values for N sweeps)
    auto window_points = [&](int eigen_index, bool ratio) {
        std::pair<std::vector<double>, std::vector<double>> pts;
        for (std::size_t vi = 0; vi < n_values; ++vi) {
            const double v = result.values[vi];
            if (config.mode != SweepMode::NDiscrete && v > config.fit_window_max) continue;
            const double y = ratio ? result.means[vi][eigen_index - 1] /
                                         result.means[vi][eigen_index]
                                   : result.means[vi][eigen_index - 1];
            if (!std::isfinite(y) || y <= 0.0) continue;
            pts.first.push_back(v);
            pts.second.push_back(y);
        }
        return pts;
    };

    result.eigen_slopes.resize(config.k_eigen);
    for (int j = 1; j <= config.k_eigen; ++j) {
        const auto pts = window_points(j, false);
        result.eigen_slopes[j - 1] = try_fit(pts.first, pts.second);
    }
    {
        const auto pts = window_points(result.K, false);
        result.sigma_K_slope = try_fit(pts.first, pts.second);
    }
    if (config.k_eigen > result.K) {
        const auto pts = window_points(result.K, true);
        result.ratio_slope = try_fit(pts.first, pts.second);
    } else {
        result.ratio_slope.note = "ratio requires k_eigen >= K + 1";
    }
    return result;
}

GapDiagnostics gap_diagnostics(const SweepResult& result, int K) {
    if (result.config.k_eigen < K + 1)
        throw ConfigError("gap_diagnostics: k_eigen must be at least K + 1");

    GapDiagnostics d;
    d.K = K;
    std::vector<double> xs, ys;
    for (std::size_t vi = 0; vi < result.values.size(); ++vi) {
        GapRow row;
        row.value = result.values[vi];
        row.sigma_K = result.means[vi][K - 1];
        row.sigma_K1 = result.means[vi][K];
        row.ratio = row.sigma_K / row.sigma_K1;
        d.rows.push_back(row);
        const bool in_window = result.config.mode == SweepMode::NDiscrete ||
                               row.value <= result.config.fit_window_max;
        if (in_window && std::isfinite(row.sigma_K1) && row.sigma_K1 > 0.0) {
            xs.push_back(row.value);
            ys.push_back(row.sigma_K1);
        }
    }
    d.sigma_K1_slope = try_fit(xs, ys);
    d.uniform_gap_flag = d.sigma_K1_slope.valid && std::abs(d.sigma_K1_slope.slope) < 0.2;
    return d;
}

FiedlerLabels fiedler_labels(const Spectrum& spectrum) {
    if (spectrum.k < 2) throw ConfigError("fiedler_labels: need at least two eigenpairs");
    Eigen::VectorXd v = spectrum.vectors_v.col(1);
    int imax = 0;
    for (int i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
    if (v[imax] < 0.0) v = -v;

    FiedlerLabels out;
    out.labels.resize(v.size());
    for (int i = 0; i < v.size(); ++i) {
        if (v[i] == 0.0) {
            out.labels[i] = 0;
            ++out.zero_entries;
        } else {
            out.labels[i] = v[i] > 0.0 ? 1 : 0;
        }
    }
    return out;
}

double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw ConfigError("clustering_accuracy: length mismatch");
    long total = 0, agree = 0, agree_flipped = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0) continue;
        ++total;
        if (predicted[i] == truth[i]) ++agree;
        if (1 - predicted[i] == truth[i]) ++agree_flipped;
    }
    if (total == 0) return 0.0;
    return static_cast<double>(std::max(agree, agree_flipped)) / static_cast<double>(total);
}

namespace {

struct SvgMapper {
    double x0, x1, y0, y1; // data ranges (log10)
    double left = 70, right = 620, top = 20, bottom = 420;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (right - left); }
    double py(double y) const { return bottom - (y - y0) / (y1 - y0) * (bottom - top); }
};

const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

void write_svg(std::ostream& os, const SweepResult& result) {
    const int k = result.config.k_eigen;
    const bool n_mode = result.config.mode == SweepMode::NDiscrete;

    // collect finite positive series (skip the zero ground state)
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (std::size_t vi = 0; vi < result.values.size(); ++vi)
        for (int j = 2; j <= k; ++j) {
            const double y = result.means[vi][j - 1];
            if (!std::isfinite(y) || y <= 0.0) continue;
            xmin = std::min(xmin, std::log10(result.values[vi]));
            xmax = std::max(xmax, std::log10(result.values[vi]));
            ymin = std::min(ymin, std::log10(y));
            ymax = std::max(ymax, std::log10(y));
        }
    if (xmin > xmax) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    const double padx = 0.05 * (xmax - xmin), pady = 0.08 * (ymax - ymin);
    SvgMapper m{xmin - padx, xmax + padx, ymin - pady, ymax + pady};

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"700\" height=\"480\" "
          "viewBox=\"0 0 700 480\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"700\" height=\"480\" fill=\"white\"/>\n";
    os << "<rect x=\"" << m.left << "\" y=\"" << m.top << "\" width=\"" << m.right - m.left
       << "\" height=\"" << m.bottom - m.top << "\" fill=\"none\" stroke=\"black\"/>\n";

    // integer decade ticks
    for (int e = static_cast<int>(std::ceil(m.x0)); e <= static_cast<int>(std::floor(m.x1)); ++e) {
        const double x = m.px(e);
        os << "<line x1=\"" << x << "\" y1=\"" << m.bottom << "\" x2=\"" << x << "\" y2=\""
           << m.bottom + 6 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << m.bottom + 20
           << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">1e" << e
           << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(m.y0)); e <= static_cast<int>(std::floor(m.y1)); ++e) {
        const double y = m.py(e);
        os << "<line x1=\"" << m.left - 6 << "\" y1=\"" << y << "\" x2=\"" << m.left << "\" y2=\""
           << y << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << m.left - 10 << "\" y=\"" << y + 4
           << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">1e" << e
           << "</text>\n";
    }
    os << "<text x=\"" << 0.5 * (m.left + m.right) << "\" y=\"460\" font-family=\"monospace\" "
          "font-size=\"13\" text-anchor=\"middle\">"
       << (n_mode ? "N" : "scale parameter") << " (log10)</text>\n";

    int legend_y = 34;
    for (int j = 2; j <= k; ++j) {
        std::ostringstream pts;
        for (std::size_t vi = 0; vi < result.values.size(); ++vi) {
            const double y = result.means[vi][j - 1];
            if (!std::isfinite(y) || y <= 0.0) continue;
            pts << m.px(std::log10(result.values[vi])) << "," << m.py(std::log10(y)) << " ";
        }
        const char* color = kPalette[(j - 2) % 6];
        os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\"/>\n";

        const SlopeFit& f = result.eigen_slopes[j - 1];
        if (f.valid) {
            // dashed fitted line over the data range (natural-log fit -> log10 plot)
            const double lx0 = m.x0 + padx, lx1 = m.x1 - padx;
            const double ln10 = std::log(10.0);
            const double fy0 = (f.intercept + f.slope * (lx0 * ln10)) / ln10;
            const double fy1 = (f.intercept + f.slope * (lx1 * ln10)) / ln10;
            os << "<line x1=\"" << m.px(lx0) << "\" y1=\"" << m.py(fy0) << "\" x2=\"" << m.px(lx1)
               << "\" y2=\"" << m.py(fy1) << "\" stroke=\"" << color
               << "\" stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n";
        }
        os << "<text x=\"" << m.right - 160 << "\" y=\"" << legend_y
           << "\" font-family=\"monospace\" font-size=\"12\" fill=\"" << color << "\">sigma_" << j;
        if (f.valid) {
            char b[32];
            std::snprintf(b, sizeof(b), " [%.2f]", f.slope);
            os << b;
        }
        os << "</text>\n";
        legend_y += 16;
    }
    os << "</svg>\n";
}

} // namespace

void emit_report(const SweepResult& result, const std::string& out_dir) {
    if (result.values.empty()) throw ConfigError("emit_report: empty sweep");
    bool any_ok = false;
    for (const auto& row : result.cells)
        for (const auto& cell : row) any_ok = any_ok || cell.ok;
    if (!any_ok) throw ConfigError("emit_report: sweep produced no successful cells");

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("emit_report: cannot create " + out_dir + ": " + ec.message());

    {
        std::ofstream csv(fs::path(out_dir) / "results.csv");
        if (!csv) throw IoError("emit_report: cannot open results.csv");
        csv << "sweep_value,trial,eigen_index,sigma\n";
        for (const auto& row : result.cells)
            for (const auto& cell : row) {
                if (!cell.ok) continue;
                for (std::size_t j = 0; j < cell.sigmas.size(); ++j)
                    csv << fmt17(cell.value) << "," << cell.trial << "," << j + 1 << ","
                        << fmt17(cell.sigmas[j]) << "\n";
            }
        if (!csv.good()) throw IoError("emit_report: write to results.csv failed");
    }

    {
        nlohmann::json j;
        j["version"] = kVersionString;
        j["config"] = result.config.to_json();
        j["K"] = result.K;
        j["slopes"] = {{"sigma_K", slope_to_json(result.sigma_K_slope)},
                       {"ratio", slope_to_json(result.ratio_slope)}};
        auto arr = nlohmann::json::array();
        for (const auto& f : result.eigen_slopes) arr.push_back(slope_to_json(f));
        j["eigen_slopes"] = arr;
        if (result.config.k_eigen > result.K) {
            const auto gaps = gap_diagnostics(result, result.K);
            j["gap"] = {{"uniform_gap_flag", gaps.uniform_gap_flag},
                        {"sigma_K1_slope", slope_to_json(gaps.sigma_K1_slope)}};
        }
        auto failures = nlohmann::json::array();
        for (const auto& row : result.cells)
            for (const auto& cell : row)
                if (!cell.ok)
                    failures.push_back(
                        {{"value", cell.value}, {"trial", cell.trial}, {"error", cell.error}});
        j["failures"] = failures;

        std::ofstream js(fs::path(out_dir) / "summary.json");
        if (!js) throw IoError("emit_report: cannot open summary.json");
        js << j.dump(2) << "\n";
        if (!js.good()) throw IoError("emit_report: write to summary.json failed");
    }

    {
        std::ofstream svg(fs::path(out_dir) / "plot.svg");
        if (!svg) throw IoError("emit_report: cannot open plot.svg");
        write_svg(svg, result);
        if (!svg.good()) throw IoError("emit_report: write to plot.svg failed");
    }
}

} // namespace pqrlab
