#include "dtrunc/cif.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "dtrunc/error.hpp"

namespace dtrunc {

const char* to_string(CifMethod method) { return method == CifMethod::dep ? "dep" : "indep"; }

CifMethod parse_cif_method(const std::string& name) {
  if (name == "indep") return CifMethod::indep;
  if (name == "dep") return CifMethod::dep;
  throw std::invalid_argument("unknown CIF method '" + name + "'");
}

namespace {

std::vector<int> distinct_types(std::span<const int> labels) {
  std::vector<int> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Cumulative sums of per-record weights by type, read off at `times`.
std::vector<std::vector<double>> weighted_steps(const TruncatedSample& s, std::span<const int> types,
                                                std::span<const double> times, const std::vector<double>& w) {
  std::vector<std::size_t> order(s.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.x(a) < s.x(b); });

  std::vector<std::vector<double>> out(types.size(), std::vector<double>(times.size(), 0.0));
  std::vector<double> running(types.size(), 0.0);
  std::size_t next = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (; next < order.size() && s.x(order[next]) <= times[k]; ++next) {
      const std::size_t i = order[next];
      const auto it = std::lower_bound(types.begin(), types.end(), s.event()[i]);
      if (it != types.end() && *it == s.event()[i]) running[static_cast<std::size_t>(it - types.begin())] += w[i];
    }
    for (std::size_t j = 0; j < types.size(); ++j) out[j][k] = running[j];
  }
  return out;
}

std::vector<std::vector<double>> indep_curves(const TruncatedSample& s, std::span<const int> types,
                                              std::span<const double> times, const CifOptions& options) {
  const auto fit = npmle(s, options.algorithm, options.npmle);
  if (!fit.converged) throw ConvergenceError("pooled NPMLE did not converge");
  const auto w = inverse_sampling_weights(s, fit.g);
  double total = 0.0;
  for (double wi : w) total += wi;
  auto out = weighted_steps(s, types, times, w);
  for (auto& row : out)
    for (auto& value : row) value /= total;
  return out;
}

std::vector<std::vector<double>> dep_curves(const TruncatedSample& s, std::span<const int> types,
                                            std::span<const double> times, const CifOptions& options) {
  std::vector<std::vector<double>> out(types.size(), std::vector<double>(times.size(), 0.0));
  std::vector<double> weight(types.size(), 0.0);
  for (std::size_t j = 0; j < types.size(); ++j) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s.event()[i] == types[j]) idx.push_back(i);
    if (idx.empty()) continue;
    const auto group = s.subset(idx);
    const auto label = std::to_string(types[j]);
    if (!existence_check(group).ok)
      throw GroupFailureError("event type " + label + " violates the existence condition within its group",
                              types[j]);
    const auto fit = npmle(group, options.algorithm, options.npmle);
    if (!fit.converged) throw GroupFailureError("NPMLE did not converge within event type " + label, types[j]);
    for (double wi : inverse_sampling_weights(group, fit.g)) weight[j] += wi;
    for (std::size_t k = 0; k < times.size(); ++k) out[j][k] = fit.f.cdf(times[k]);
  }
  double total = 0.0;
  for (double wj : weight) total += wj;
  for (std::size_t j = 0; j < types.size(); ++j)
    for (auto& value : out[j]) value *= weight[j] / total;
  return out;
}

}  // namespace

std::vector<std::vector<double>> cif_curves(const TruncatedSample& s, std::span<const int> types,
                                            std::span<const double> times, const CifOptions& options) {
  if (!s.has_events()) throw std::invalid_argument("cumulative incidence needs event labels");
  return options.method == CifMethod::dep ? dep_curves(s, types, times, options)
                                          : indep_curves(s, types, times, options);
}

CifFit cif(const TruncatedSample& s, const CifOptions& options) {
  if (!s.has_events()) throw std::invalid_argument("cumulative incidence needs event labels");
  CifFit out;
  out.method = options.method;
  out.types = distinct_types(s.event());
  for (int t : out.types)
    out.group_sizes.push_back(static_cast<std::size_t>(std::count(s.event().begin(), s.event().end(), t)));
  out.times.assign(s.x().begin(), s.x().end());
  std::sort(out.times.begin(), out.times.end());
  out.times.erase(std::unique(out.times.begin(), out.times.end()), out.times.end());
  out.cif = cif_curves(s, out.types, out.times, options);
  out.level = options.level;
  out.seed = options.seed;
  if (options.B < 2) return out;

  out.B = options.B;
  const std::size_t m = out.times.size();
  auto reps = run_replicates(options.B, options.seed, options.threads,
                             [&](CounterRng& rng) -> std::optional<std::vector<double>> {
                               const auto resample = s.subset(resample_indices(s.size(), rng));
                               if (options.method == CifMethod::indep && !existence_check(resample).ok)
                                 return std::nullopt;
                               const auto curves = cif_curves(resample, out.types, out.times, options);
                               std::vector<double> flat;
                               flat.reserve(curves.size() * m);
                               for (const auto& row : curves) flat.insert(flat.end(), row.begin(), row.end());
                               return flat;
                             });
  out.failures = reps.failures;
  std::vector<double> estimate;
  for (const auto& row : out.cif) estimate.insert(estimate.end(), row.begin(), row.end());
  const auto summary = summarize_replicates(reps.values, estimate, options.level, options.interval);
  for (std::size_t j = 0; j < out.types.size(); ++j) {
    const auto from = static_cast<std::ptrdiff_t>(j * m), to = static_cast<std::ptrdiff_t>((j + 1) * m);
    out.se.emplace_back(summary.se.begin() + from, summary.se.begin() + to);
    out.ci_low.emplace_back(summary.low.begin() + from, summary.low.begin() + to);
    out.ci_high.emplace_back(summary.high.begin() + from, summary.high.begin() + to);
  }
  return out;
}

std::vector<int> merge_rare_types(std::span<const int> labels, std::size_t min_count, int merged) {
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  std::vector<int> out(labels.begin(), labels.end());
  for (auto& l : out)
    if (counts[l] < min_count) l = merged;
  return out;
}

std::vector<int> remap_types(std::span<const int> labels, const std::map<int, int>& mapping) {
  std::vector<int> out(labels.begin(), labels.end());
  for (auto& l : out)
    if (const auto it = mapping.find(l); it != mapping.end()) l = it->second;
  return out;
}

}  // namespace dtrunc
