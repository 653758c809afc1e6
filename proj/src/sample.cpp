#include "dtrunc/sample.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "dtrunc/csv.hpp"
#include "dtrunc/error.hpp"

namespace dtrunc {

namespace {

std::string join_rows(const std::vector<std::size_t>& rows, std::size_t offset, std::size_t limit = 20) {
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size() && i < limit; ++i) {
    if (i) os << ", ";
    os << rows[i] + offset;
  }
  if (rows.size() > limit) os << ", ... (" << rows.size() << " total)";
  return os.str();
}

bool record_ok(double x, double u, double v) {
  return std::isfinite(x) && std::isfinite(u) && std::isfinite(v) && u <= x && x <= v;
}

}  // namespace

TruncatedSample::TruncatedSample(std::vector<double> x, std::vector<double> u, std::vector<double> v,
                                 Eigen::MatrixXd z, std::vector<std::string> z_names,
                                 std::vector<int> event)
    : x_(std::move(x)),
      u_(std::move(u)),
      v_(std::move(v)),
      z_(std::move(z)),
      z_names_(std::move(z_names)),
      event_(std::move(event)) {
  const std::size_t n = x_.size();
  if (n == 0) throw ValidationError("sample is empty");
  if (u_.size() != n || v_.size() != n)
    throw ValidationError("x, u and v must have equal length");
  if (z_.cols() > 0 && static_cast<std::size_t>(z_.rows()) != n)
    throw ValidationError("covariate matrix must have one row per record");
  if (!event_.empty() && event_.size() != n)
    throw ValidationError("event labels must have one entry per record");
  if (z_.cols() > 0 && !z_.allFinite()) throw ValidationError("covariates must be finite");
  if (z_names_.empty()) {
    for (Eigen::Index j = 0; j < z_.cols(); ++j)
      z_names_.push_back(z_.cols() == 1 ? "z" : "z" + std::to_string(j + 1));
  } else if (static_cast<Eigen::Index>(z_names_.size()) != z_.cols()) {
    throw ValidationError("one name per covariate column required");
  }

  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < n; ++i)
    if (!record_ok(x_[i], u_[i], v_[i])) bad.push_back(i);
  if (!bad.empty())
    throw ValidationError("U <= X <= V violated (or non-finite) at records " + join_rows(bad, 0),
                          std::move(bad));
}

TruncatedSample TruncatedSample::subset(std::span<const std::size_t> indices) const {
  const std::size_t m = indices.size();
  std::vector<double> x(m), u(m), v(m);
  Eigen::MatrixXd z(has_covariates() ? static_cast<Eigen::Index>(m) : 0, z_.cols());
  std::vector<int> event(has_events() ? m : 0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = indices[k];
    x[k] = x_[i];
    u[k] = u_[i];
    v[k] = v_[i];
    if (has_covariates()) z.row(static_cast<Eigen::Index>(k)) = z_.row(static_cast<Eigen::Index>(i));
    if (has_events()) event[k] = event_[i];
  }
  return TruncatedSample(std::move(x), std::move(u), std::move(v), std::move(z), z_names_,
                         std::move(event));
}

TruncatedSample TruncatedSample::with_events(std::vector<int> event) const {
  return TruncatedSample(x_, u_, v_, z_, z_names_, std::move(event));
}

TruncatedSample TruncatedSample::without_covariates() const {
  return TruncatedSample(x_, u_, v_, {}, {}, event_);
}

bool operator==(const TruncatedSample& a, const TruncatedSample& b) {
  return a.x_ == b.x_ && a.u_ == b.u_ && a.v_ == b.v_ && a.z_.rows() == b.z_.rows() &&
         a.z_.cols() == b.z_.cols() && a.z_ == b.z_ && a.z_names_ == b.z_names_ &&
         a.event_ == b.event_;
}

// ---------------------------------------------------------------------------

StepDistribution::StepDistribution(std::vector<double> support, std::vector<double> mass)
    : support_(std::move(support)), mass_(std::move(mass)) {
  if (support_.size() != mass_.size())
    throw ValidationError("support and mass must have equal length");
  for (std::size_t j = 1; j < support_.size(); ++j)
    if (!(support_[j - 1] < support_[j]))
      throw ValidationError("support must be strictly increasing");
  cumulative_.resize(mass_.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < mass_.size(); ++j) {
    if (mass_[j] < 0.0) throw ValidationError("negative probability mass");
    acc += mass_[j];
    cumulative_[j] = acc;
  }
}

double StepDistribution::cdf(double t) const {
  auto it = std::upper_bound(support_.begin(), support_.end(), t);
  if (it == support_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double StepDistribution::cdf_left(double t) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), t);
  if (it == support_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double eval_cdf(const StepDistribution& f, double t) { return f.cdf(t); }
double eval_cdf_leftlimit(const StepDistribution& f, double t) { return f.cdf_left(t); }

// ---------------------------------------------------------------------------

ExistenceReport existence_check(const TruncatedSample& s) {
  const std::size_t n = s.size();
  std::vector<double> xs(s.x().begin(), s.x().end());
  std::vector<double> us(s.u().begin(), s.u().end());
  std::vector<double> vs(s.v().begin(), s.v().end());
  std::sort(xs.begin(), xs.end());
  std::sort(us.begin(), us.end());
  std::sort(vs.begin(), vs.end());

  ExistenceReport report;
  report.s1.resize(n);
  report.s2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = s.x(i);
    // windows with U_k <= X_i, minus those that also end before X_i
    const auto started = std::upper_bound(us.begin(), us.end(), xi) - us.begin();
    const auto ended = std::lower_bound(vs.begin(), vs.end(), xi) - vs.begin();
    report.s1[i] = static_cast<std::size_t>(started - ended);
    const auto lo = std::lower_bound(xs.begin(), xs.end(), s.u(i));
    const auto hi = std::upper_bound(xs.begin(), xs.end(), s.v(i));
    report.s2[i] = static_cast<std::size_t>(hi - lo);
    if (report.s1[i] <= 1 || report.s2[i] <= 1) report.violating_indices.push_back(i);
  }
  report.ok = report.violating_indices.empty();
  return report;
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& line, bool comma) {
  std::vector<std::string> out;
  if (comma) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      out.push_back(unquote(trim(std::string_view(line).substr(start, pos - start))));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  } else {
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(unquote(tok));
  }
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last)
    throw ParseError("non-numeric value '" + cell + "' in column '" + column + "' at data row " +
                         std::to_string(row),
                     row);
  return value;
}

bool is_default_z(const std::string& name) {
  if (name.empty() || name[0] != 'z') return false;
  return std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

LoadResult read_sample(std::istream& in, const LoadOptions& options) {
  const ColumnMap& map = options.columns;
  std::string line;
  std::vector<std::string> header;
  bool comma = false;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    comma = t.find(',') != std::string::npos;
    header = split(t, comma);
    break;
  }
  if (header.empty()) throw ParseError("input has no header row");

  auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return j;
    return std::nullopt;
  };
  auto require_col = [&](const std::string& name) {
    auto j = find_col(name);
    if (!j) throw ParseError("missing required column '" + name + "'");
    return *j;
  };

  const std::size_t cx = require_col(map.x);
  const std::size_t cu = require_col(map.u);
  const std::size_t cv = require_col(map.v);
  std::vector<std::size_t> cz;
  std::vector<std::string> z_names;
  if (!map.z.empty()) {
    for (const auto& name : map.z) {
      cz.push_back(require_col(name));
      z_names.push_back(name);
    }
  } else {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (is_default_z(header[j])) {
        cz.push_back(j);
        z_names.push_back(header[j]);
      }
  }
  std::optional<std::size_t> ce;
  if (!map.event.empty()) {
    ce = require_col(map.event);
  } else {
    ce = find_col("event");
  }

  std::vector<double> x, u, v, zflat;
  std::vector<int> event;
  LoadResult result;
  std::vector<std::size_t> invalid;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    ++row;
    auto cells = split(t, comma);
    std::size_t offset = 0;
    if (cells.size() == header.size() + 1) {
      offset = 1;  // leading row label
    } else if (cells.size() != header.size()) {
      throw ParseError("data row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " fields, header has " + std::to_string(header.size()),
                       row);
    }
    auto cell = [&](std::size_t j) -> const std::string& { return cells[j + offset]; };
    const double xi = parse_cell(cell(cx), row, header[cx]);
    const double ui = parse_cell(cell(cu), row, header[cu]);
    const double vi = parse_cell(cell(cv), row, header[cv]);
    std::vector<double> zi;
    for (std::size_t j : cz) zi.push_back(parse_cell(cell(j), row, header[j]));
    int ei = 0;
    if (ce) {
      const double e = parse_cell(cell(*ce), row, header[*ce]);
      if (e != std::floor(e) || std::abs(e) > 1e9)
        throw ParseError("event label must be an integer at data row " + std::to_string(row), row);
      ei = static_cast<int>(e);
    }
    if (!record_ok(xi, ui, vi)) {
      if (options.drop_invalid) {
        result.dropped_rows.push_back(row);
        continue;
      }
      invalid.push_back(row);
      continue;
    }
    x.push_back(xi);
    u.push_back(ui);
    v.push_back(vi);
    zflat.insert(zflat.end(), zi.begin(), zi.end());
    if (ce) event.push_back(ei);
  }
  if (!invalid.empty()) {
    std::vector<std::size_t> zero_based(invalid.size());
    std::transform(invalid.begin(), invalid.end(), zero_based.begin(), [](std::size_t r) { return r - 1; });
    throw ValidationError("U <= X <= V violated (or non-finite) at data rows " + join_rows(invalid, 0),
                          std::move(zero_based));
  }
  if (x.empty()) throw ValidationError("no valid records in input");

  Eigen::MatrixXd z;
  if (!cz.empty()) {
    z.resize(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(cz.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < cz.size(); ++j)
        z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = zflat[i * cz.size() + j];
  }
  result.sample = TruncatedSample(std::move(x), std::move(u), std::move(v), std::move(z),
                                  std::move(z_names), std::move(event));
  return result;
}

LoadResult load_sample(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file '" + path + "'");
  return read_sample(in, options);
}

void write_sample(std::ostream& out, const TruncatedSample& s) {
  std::vector<std::string> names{"x", "u", "v"};
  for (const auto& name : s.z_names()) names.push_back(name);
  if (s.has_events()) names.emplace_back("event");
  CsvWriter csv(out);
  csv.header(names);
  std::vector<double> row;
  for (std::size_t i = 0; i < s.size(); ++i) {
    row = {s.x(i), s.u(i), s.v(i)};
    for (std::size_t j = 0; j < s.covariate_count(); ++j)
      row.push_back(s.z()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    if (s.has_events()) row.push_back(s.event()[i]);
    csv.row(row);
  }
}

}  // namespace dtrunc
