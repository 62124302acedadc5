#include "sdec/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sdec {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    return f;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

// Reads a CSV with a header row and uniform time in the first column;
// returns the header names and data columns.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols;
    double t0 = 0.0;
    double dt = 0.0;
};

Table read_time_table(const std::string& path) {
    std::ifstream f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
    Table tb;
    tb.header = split_csv_line(line);
    if (tb.header.size() < 2 || tb.header[0] != "t")
        throw std::runtime_error(path + ": expected header starting with t");
    tb.cols.resize(tb.header.size());
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != tb.header.size())
            throw std::runtime_error(path + ": ragged row");
        for (std::size_t c = 0; c < cells.size(); ++c) tb.cols[c].push_back(std::stod(cells[c]));
    }
    const auto& t = tb.cols[0];
    if (t.size() < 2) throw std::runtime_error(path + ": need at least two rows");
    tb.t0 = t[0];
    tb.dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double step = t[i] - t[i - 1];
        if (std::abs(step - tb.dt) > 1e-6 * std::max(1.0, std::abs(tb.dt)))
            throw std::runtime_error(path + ": time grid is not uniform");
    }
    return tb;
}

} // namespace

void write_dataset_csv(const std::string& path, const UniformTimeSeries& x,
                       const std::vector<UniformTimeSeries>& aux) {
    if (aux.size() > 2) throw std::invalid_argument("dataset CSV supports at most two aux series");
    std::ofstream f = open_out(path);
    f << "t,x";
    if (!aux.empty()) f << ",u";
    if (aux.size() > 1) f << ",v";
    f << "\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        f << fmt(x.time(i)) << ',' << fmt(x.values[i]);
        for (const auto& a : aux) f << ',' << fmt(a.values[i]);
        f << "\n";
    }
}

LoadedDataset read_dataset_csv(const std::string& path) {
    const Table tb = read_time_table(path);
    if (tb.header[1] != "x") throw std::runtime_error(path + ": second column must be x");
    LoadedDataset ds;
    ds.x = {tb.t0, tb.dt, tb.cols[1]};
    for (std::size_t c = 2; c < tb.cols.size(); ++c)
        ds.aux.push_back({tb.t0, tb.dt, tb.cols[c]});
    return ds;
}

std::string write_dataset(const std::string& dir, const std::string& stem,
                          const SyntheticDataset& ds) {
    std::filesystem::create_directories(dir);
    const std::string csv = (std::filesystem::path(dir) / (stem + ".csv")).string();
    write_dataset_csv(csv, ds.x, ds.aux);

    json side;
    side["model"] = ds.model_id;
    side["example"] = ds.example_id;
    side["seed"] = ds.seed;
    side["n"] = ds.x.size();
    side["dt"] = ds.x.dt;
    side["theta_true"] = ds.theta_true;
    side["theta_clamped"] = ds.theta_clamped;
    side["retries"] = ds.retries;
    if (ds.gamma_true.has_value()) side["gamma_true"] = *ds.gamma_true;
    std::ofstream jf =
        open_out((std::filesystem::path(dir) / (stem + ".json")).string());
    jf << side.dump(2) << "\n";
    return csv;
}

void write_gamma_csv(const std::string& path, const AffiliationMatrix& gamma, double t0,
                     double dt) {
    std::ofstream f = open_out(path);
    f << "t";
    for (std::size_t c = 0; c < gamma.clusters(); ++c) f << ",gamma_" << (c + 1);
    f << "\n";
    for (std::size_t i = 0; i < gamma.grid_len; ++i) {
        f << fmt(t0 + dt * static_cast<double>(i));
        for (std::size_t c = 0; c < gamma.clusters(); ++c) f << ',' << fmt(gamma.weights[c][i]);
        f << "\n";
    }
}

AffiliationMatrix read_gamma_csv(const std::string& path) {
    const Table tb = read_time_table(path);
    AffiliationMatrix g;
    g.grid_len = tb.cols[0].size();
    for (std::size_t c = 1; c < tb.cols.size(); ++c) g.weights.push_back(tb.cols[c]);
    return g;
}

void write_theta_path_csv(const std::string& path,
                          const std::vector<std::vector<double>>& theta_path, double t0,
                          double dt) {
    std::ofstream f = open_out(path);
    f << "t";
    for (std::size_t m = 0; m < theta_path.size(); ++m) f << ",theta_" << (m + 1);
    f << "\n";
    const std::size_t n = theta_path.empty() ? 0 : theta_path[0].size();
    for (std::size_t i = 0; i < n; ++i) {
        f << fmt(t0 + dt * static_cast<double>(i));
        for (const auto& row : theta_path) f << ',' << fmt(row[i]);
        f << "\n";
    }
}

void write_fitness_csv(const std::string& path, const FitnessMatrix& fitness) {
    std::ofstream f = open_out(path);
    for (const auto& row : fitness.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) f << ',';
            f << fmt(row[i]);
        }
        f << "\n";
    }
}

void write_clustering_json(const std::string& path, const ClusteringResult& result,
                           const std::string& model_id, double alpha) {
    json j;
    j["model"] = model_id;
    j["K"] = result.n_clusters;
    j["eps2"] = result.eps2;
    j["alpha"] = alpha;
    j["seed"] = result.seed;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["functional_trace"] = result.functional_trace;
    j["density_floor_hits"] = result.density_floor_hits;
    std::vector<std::vector<double>> thetas;
    thetas.reserve(result.theta.size());
    for (const auto& th : result.theta) thetas.push_back(th.values);
    j["theta"] = thetas;
    std::ofstream f = open_out(path);
    f << j.dump(2) << "\n";
}

ClusteringResult read_clustering_json(const std::string& json_path,
                                      const std::string& gamma_csv_path, std::string* model_id) {
    std::ifstream f = open_in(json_path);
    json j;
    f >> j;
    ClusteringResult r;
    r.n_clusters = j.at("K").get<std::size_t>();
    r.eps2 = j.at("eps2").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.converged = j.at("converged").get<bool>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.functional_trace = j.at("functional_trace").get<std::vector<double>>();
    r.density_floor_hits = j.at("density_floor_hits").get<std::uint64_t>();
    for (const auto& th : j.at("theta")) r.theta.emplace_back(th.get<std::vector<double>>());
    if (model_id) *model_id = j.at("model").get<std::string>();
    r.gamma_fine = read_gamma_csv(gamma_csv_path);
    if (r.gamma_fine.clusters() != r.n_clusters)
        throw std::runtime_error("clustering result: gamma CSV cluster count mismatch");
    return r;
}

void write_energy_csv(const std::string& path, const EnergyCurve& curve) {
    std::ofstream f = open_out(path);
    f << "eps2";
    for (std::size_t l = 0; l < curve.energy.size(); ++l) f << ",energy_l" << l;
    f << "\n";
    for (std::size_t i = 0; i < curve.eps2_values.size(); ++i) {
        f << fmt(curve.eps2_values[i]);
        for (const auto& row : curve.energy) f << ',' << fmt(row[i]);
        f << "\n";
    }
}

void write_gap_csv(const std::string& path, const DiversityReport& report) {
    std::ofstream f = open_out(path);
    f << "K,logW,logW_ref_mean,gap\n";
    for (std::size_t i = 0; i < report.k_values.size(); ++i)
        f << report.k_values[i] << ',' << fmt(report.logW[i]) << ','
          << fmt(report.logW_ref_mean[i]) << ',' << fmt(report.gap[i]) << "\n";
}

void write_closure_json(const std::string& path, const ClosureFit& fit) {
    json j;
    j["u_bars"] = fit.u_bars;
    std::vector<std::vector<double>> thetas;
    for (const auto& th : fit.theta_bars) thetas.push_back(th.values);
    j["theta_bars"] = thetas;
    j["residual_rms"] = fit.residual_rms;
    j["scaling"] = json::array();
    for (const auto& s : fit.scaling) {
        json js;
        js["coeffs"] = s.coeffs;
        js["u_min"] = s.u_min;
        js["u_max"] = s.u_max;
        js["aux_index"] = s.aux_index;
        j["scaling"].push_back(js);
    }
    std::ofstream f = open_out(path);
    f << j.dump(2) << "\n";
}

ClosureFit read_closure_json(const std::string& path) {
    std::ifstream f = open_in(path);
    json j;
    f >> j;
    ClosureFit fit;
    fit.u_bars = j.at("u_bars").get<std::vector<std::vector<double>>>();
    for (const auto& th : j.at("theta_bars"))
        fit.theta_bars.emplace_back(th.get<std::vector<double>>());
    fit.residual_rms = j.at("residual_rms").get<std::vector<double>>();
    for (const auto& js : j.at("scaling")) {
        ScalingFunction s;
        s.coeffs = js.at("coeffs").get<std::vector<double>>();
        s.u_min = js.at("u_min").get<double>();
        s.u_max = js.at("u_max").get<double>();
        s.aux_index = js.at("aux_index").get<int>();
        fit.scaling.push_back(s);
    }
    return fit;
}

} // namespace sdec
