#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "dtrunc/npmle.hpp"
#include "dtrunc/resampling.hpp"
#include "dtrunc/sample.hpp"

namespace dtrunc {

/// indep: one pooled G_n for every event type.
/// dep: G_n and F_n estimated within each event type, mixed by inverse-G weighted group sizes.
enum class CifMethod { indep, dep };

const char* to_string(CifMethod method);
CifMethod parse_cif_method(const std::string& name);

struct CifOptions {
  CifMethod method = CifMethod::indep;
  int B = 300;  ///< bootstrap bands when B >= 2
  double level = 0.95;
  std::uint64_t seed = 0;
  CiMethod interval = CiMethod::percentile;
  unsigned threads = 1;
  NpmleAlgorithm algorithm = NpmleAlgorithm::selfconsistency;
  NpmleOptions npmle;
};

struct CifFit {
  CifMethod method = CifMethod::indep;
  std::vector<int> types;              ///< ascending event labels
  std::vector<std::size_t> group_sizes;
  std::vector<double> times;           ///< distinct pooled event values, ascending
  /// cif[j][k] = CIF of types[j] at times[k]; non-decreasing in k.
  std::vector<std::vector<double>> cif;
  /// Empty unless bands were requested.
  std::vector<std::vector<double>> se, ci_low, ci_high;
  double level = 0.95;
  int B = 0;
  int failures = 0;
  std::uint64_t seed = 0;
};

/// Throws GroupFailureError naming the first event type whose within-group
/// NPMLE fails the existence condition or does not converge (dep method).
CifFit cif(const TruncatedSample& s, const CifOptions& options = {});

/// Point estimates only, at the given times (used per bootstrap resample).
std::vector<std::vector<double>> cif_curves(const TruncatedSample& s, std::span<const int> types,
                                            std::span<const double> times, const CifOptions& options);

/// Relabels every event type with fewer than `min_count` records as `merged`.
std::vector<int> merge_rare_types(std::span<const int> labels, std::size_t min_count, int merged);

/// Applies an explicit label map; labels without an entry are kept.
std::vector<int> remap_types(std::span<const int> labels, const std::map<int, int>& mapping);

}  // namespace dtrunc
