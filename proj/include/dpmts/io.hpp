#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpmts/inference.hpp"
#include "dpmts/priors.hpp"
#include "dpmts/sampler.hpp"
#include "dpmts/tar.hpp"

namespace dpmts {

namespace fs = std::filesystem;

/// Reads a numeric series. Plain files hold one value per line (an optional
/// non-numeric first line is taken as a header). Comma-separated files need a
/// header; `column` selects a field by name and may be omitted when there is
/// exactly one field. Blank or non-numeric rows raise ValidationError with the
/// offending line number.
std::vector<double> read_series(const fs::path& path, const std::string& column = "");

/// One value per line at full precision, with an optional header line.
void write_series(const fs::path& path, const std::vector<double>& series, const std::string& header = "");

/// Fitted draws of any of the three models, as read back from disk.
struct StoredDraws {
  PosteriorDraws mixture;  // general and stationary
  TarFit tar;              // tar
  const std::string& model() const { return mixture.meta.model; }
  const DrawsMeta& meta() const { return mixture.meta; }
  std::size_t size() const;
  /// A transition view over whichever draws are held.
  std::unique_ptr<TransitionDraws> view() const;
};

/// Columnar text export: '#'-prefixed metadata lines, one header row, one row
/// per retained draw.
///  general / stationary: iteration alpha m_x v_x m_y v_y s_x s_y theta c nu_x nu_y,
///    then mu_x.l mu_y.l beta.l delta_x.l delta_y.l for l = 1..L, then zeta.1..zeta.(L-1)
///  tar: iteration phi0_1 phi1_1 tau_1 phi0_2 phi1_2 tau_2 r
void write_draws(const fs::path& path, const PosteriorDraws& draws);
void write_draws(const fs::path& path, const TarFit& fit);
StoredDraws read_draws(const fs::path& path);

void write_grid(const fs::path& path, const DensityGrid& grid, const std::string& comment = "");
void write_ppo(const fs::path& path, const PpoResult& result, const std::string& comment = "");
void write_paths(const fs::path& path, const Matrix& paths);
void write_trace(const fs::path& path, const std::vector<TraceRecord>& trace);

/// Checkpoints are JSON; doubles are written in shortest round-trip form.
void write_checkpoint(const fs::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const fs::path& path);

/// What `predict` should compute.
struct InferenceRequests {
  std::vector<double> transition_at;
  bool forecast = false;
  std::optional<double> z_n;
  bool expectation = false;
  std::size_t horizon = 0;
  std::size_t paths_per_draw = 4;
  std::size_t grid_points = 512;
  std::optional<double> grid_lo, grid_hi;
  double level = 0.95;
  std::optional<std::size_t> ppo_t_start;

  bool empty() const { return transition_at.empty() && !forecast && !expectation && horizon == 0; }
  bool operator==(const InferenceRequests&) const = default;
};

/// Everything a run needs, loadable from a JSON config file and overridable
/// from the command line.
struct RunConfig {
  std::string model = "general";
  std::string data;
  std::string column;
  std::optional<double> center, range;
  PriorShapes shapes;
  /// Explicit hyperprior constants; when absent they follow from the data proxy.
  std::optional<HyperpriorConfig> priors;
  std::size_t truncation = 30;
  std::optional<TarPriors> tar_priors;
  SamplerSettings settings;
  InferenceRequests requests;
  std::string output_dir;
  std::size_t chains = 1;

  /// Throws ValidationError listing every problem found.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

std::string to_json_text(const RunConfig& config);
RunConfig run_config_from_json_text(const std::string& text);
RunConfig read_run_config(const fs::path& path);
void write_run_config(const fs::path& path, const RunConfig& config);

std::string to_json_text(const HyperpriorConfig& config);
std::string to_json_text(const SamplerSettings& settings);

}  // namespace dpmts
