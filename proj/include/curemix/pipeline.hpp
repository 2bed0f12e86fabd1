#pragma once

#include "curemix/data.hpp"
#include "curemix/incidence.hpp"
#include "curemix/kernels.hpp"
#include "curemix/latency_cox.hpp"
#include "curemix/mle_baseline.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>

namespace curemix {

struct PresmoothOptions {
  std::optional<Bandwidth> bandwidth;  // skips cross-validation when set
  std::optional<BandwidthGrid> grid;
  CvOptions cv{};
  std::uint64_t seed = 0;
  IncidenceOptions incidence{};
  LatencyOptions latency{};
  std::size_t workers = 1;
};

struct PresmoothResult {
  CureModelFit fit;            // gamma on the original covariate scale
  Bandwidth bandwidth;         // on the standardized scale
  bool bandwidth_override = false;
  Eigen::VectorXd pihat;
  IncidenceFit incidence;      // gamma on the standardized scale
  LatencyFit latency;
};

// Two-step estimator: standardize, choose the bandwidth, presmooth, fit the soft-label
// incidence, then the profiling EM for the latency with the incidence held fixed.
PresmoothResult fit_presmoothing(const SurvivalDataset& ds, const PresmoothOptions& options = {});

// Joint EM on standardized covariates, reported on the original scale.
CureModelFit fit_mle(const SurvivalDataset& ds, const MleOptions& options = {});

// Stacked (gamma, beta), the parameter vector used by the bootstrap and the study.
Eigen::VectorXd stacked_parameters(const CureModelFit& fit);

}  // namespace curemix
