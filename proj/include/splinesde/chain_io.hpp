#pragma once

#include "splinesde/config.hpp"
#include "splinesde/mcmc.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace splinesde {

/// Parsed chain file: embedded configuration, run metadata and draws.
struct ChainFile {
  RunConfig config;
  std::map<std::string, std::string> metadata;
  std::size_t n_theta = 0;
  std::size_t n_xi = 0;
  std::vector<Draw> draws;
};

/// Configuration keys that do not influence the draws (thread count and
/// output paths) and are therefore left out of file headers.
bool is_execution_key(const std::string& key);

/// CSV with columns iter, theta_1..theta_M, xi_1..xi_K, log_joint, accepted,
/// preceded by `# key=value` lines holding the effective configuration (with
/// the resolved anchor) and run metadata.
void write_chain(const ChainOutput& output, const std::filesystem::path& path);
ChainFile read_chain(const std::filesystem::path& path);

/// Per-iteration trace: iter, log_joint, kappa, accepted.
void write_diagnostics(const ChainOutput& output, const std::filesystem::path& path);

/// One row per (draw, grid point): draw_id, v, x, b, sigma, alpha, eta,
/// in_domain. Quantities that would need an evaluation outside the h- or
/// u-domain are written as nan and the row gets in_domain = 0.
void write_function_grid(const std::vector<ModelParams>& draws, const std::vector<double>& grid,
                         const std::filesystem::path& path,
                         const std::vector<std::pair<std::string, std::string>>& header = {});

/// Parameters for every draw of a chain file, with bases rebuilt from its
/// embedded configuration.
std::vector<ModelParams> chain_params(const ChainFile& chain);

}  // namespace splinesde
