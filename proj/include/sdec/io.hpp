#ifndef SDEC_IO_HPP
#define SDEC_IO_HPP

#include <string>
#include <vector>

#include "sdec/closure.hpp"
#include "sdec/hyperselect.hpp"
#include "sdec/subspace.hpp"
#include "sdec/synth.hpp"

namespace sdec {

// All writers print doubles with 17 significant digits, so write -> read ->
// write reproduces files byte for byte.

struct LoadedDataset {
    UniformTimeSeries x;
    std::vector<UniformTimeSeries> aux;
};

// "t,x,u[,v]" with one row per node; dt is inferred and checked uniform.
void write_dataset_csv(const std::string& path, const UniformTimeSeries& x,
                       const std::vector<UniformTimeSeries>& aux);
LoadedDataset read_dataset_csv(const std::string& path);

// Dataset CSV plus a JSON sidecar (same stem, .json) carrying the true
// parameter paths and generation metadata. Returns the CSV path.
std::string write_dataset(const std::string& dir, const std::string& stem,
                          const SyntheticDataset& ds);

// "t,gamma_1..gamma_K"
void write_gamma_csv(const std::string& path, const AffiliationMatrix& gamma, double t0,
                     double dt);
AffiliationMatrix read_gamma_csv(const std::string& path);

// "t,theta_1..theta_n"
void write_theta_path_csv(const std::string& path,
                          const std::vector<std::vector<double>>& theta_path, double t0,
                          double dt);

// One CSV row per cluster (debug output).
void write_fitness_csv(const std::string& path, const FitnessMatrix& fitness);

void write_clustering_json(const std::string& path, const ClusteringResult& result,
                           const std::string& model_id, double alpha);
// Rebuilds a ClusteringResult from the JSON plus the gamma CSV.
ClusteringResult read_clustering_json(const std::string& json_path,
                                      const std::string& gamma_csv_path,
                                      std::string* model_id = nullptr);

// "eps2,energy_l0,..." one row per eps2 value.
void write_energy_csv(const std::string& path, const EnergyCurve& curve);
// "K,logW,logW_ref_mean,gap" one row per K.
void write_gap_csv(const std::string& path, const DiversityReport& report);

void write_closure_json(const std::string& path, const ClosureFit& fit);
ClosureFit read_closure_json(const std::string& path);

} // namespace sdec

#endif
