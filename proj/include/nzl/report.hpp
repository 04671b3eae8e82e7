#pragma once

#include <string>
#include <vector>

namespace nzl {

/// Diagnostics for one solved diagonal system (a wide stage or a skip block).
struct SolveDiagnostics {
  int layer = 0;            // target layer index (0-based)
  int block = -1;           // skip-block index within the layer, -1 for wide
  double residual = 0.0;    // ||C diag(x) B - W||_F after the solve
  double condition = 0.0;   // condition estimate of the Khatri-Rao system
  double margin = 0.0;      // guaranteed minimum linearized pre-activation
  double gamma_min_abs = 0.0;
  bool full_rank = true;    // Khatri-Rao system classified Unique
  bool used_pinv = false;   // pseudo-inverse fallback employed
  double density = 1.0;     // realized nonzero fraction (sparse runs)
  bool zero_row_or_col = false;  // Omega_0 event on a sparsified factor
  double bias_residual = 0.0;    // bias-cancellation residual (deep, last block)
};

struct ReconstructionReport {
  std::string kind;  // "wide" | "lowrank" | "deep" | "sparse"
  std::vector<SolveDiagnostics> entries;
  int resamples = 0;          // zero-scale resampling events (deep)
  int singular_layers = 0;    // systems that were not full rank

  bool all_full_rank() const { return singular_layers == 0; }
};

}  // namespace nzl
