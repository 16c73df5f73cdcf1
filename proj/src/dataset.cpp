#include "badc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <limits>
#include <sstream>
#include <cstdio>

#include "badc/error.hpp"
#include "badc/rng.hpp"

namespace badc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  if (delim == ' ' || delim == '\t') {
    // Whitespace-separated files often pad with repeated separators.
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) cells.push_back(tok);
    return cells;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

double floor_eps(double v) { return std::floor(v + 1e-9); }

}  // namespace

Dataset parse_csv(std::istream& in, const CsvOptions& opts) {
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line, opts.delimiter);
    if (opts.header && header.empty()) {
      header = std::move(cells);
      continue;
    }
    if (!header.empty() && cells.size() != header.size()) {
      throw DatasetError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                         " cells, expected " + std::to_string(header.size()));
    }
    if (header.empty() && !rows.empty() && cells.size() != rows.front().size()) {
      throw DatasetError("line " + std::to_string(line_no) + " has an inconsistent cell count");
    }
    rows.push_back(std::move(cells));
  }
  const std::size_t ncols = !header.empty() ? header.size() : (rows.empty() ? 0 : rows.front().size());
  if (ncols < 2) throw DatasetError("dataset needs at least one feature and a label column");

  std::size_t label_col = 0;
  if (const auto* name = std::get_if<std::string>(&opts.label_column)) {
    if (header.empty()) throw DatasetError("label column given by name but the file has no header");
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw DatasetError("unknown label column '" + *name + "'");
    label_col = static_cast<std::size_t>(it - header.begin());
  } else {
    const int idx = std::get<int>(opts.label_column);
    const long resolved = idx < 0 ? static_cast<long>(ncols) + idx : idx;
    if (resolved < 0 || resolved >= static_cast<long>(ncols)) {
      throw DatasetError("label column index " + std::to_string(idx) + " out of range");
    }
    label_col = static_cast<std::size_t>(resolved);
  }

  Dataset ds;
  for (std::size_t c = 0; c < ncols; ++c) {
    if (c == label_col) continue;
    ds.feature_names.push_back(header.empty() ? "f" + std::to_string(ds.feature_names.size()) : header[c]);
  }

  std::vector<std::string> label_tokens;
  std::vector<double> values(ncols - 1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const bool missing = std::any_of(cells.begin(), cells.end(), [&](const std::string& c) {
      return c.empty() || c == opts.missing;
    });
    if (missing) {
      ++ds.dropped_rows;
      continue;
    }
    std::size_t k = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c == label_col) continue;
      if (!parse_double(cells[c], values[k])) {
        throw DatasetError("non-numeric feature cell '" + cells[c] + "' in data row " +
                           std::to_string(r + 1) + ", column " + std::to_string(c + 1));
      }
      ++k;
    }
    ds.x.append_row(values);
    label_tokens.push_back(cells[label_col]);
  }
  if (label_tokens.empty()) throw DatasetError("dataset is empty after dropping missing values");

  bool numeric = true;
  std::map<std::string, double> numeric_value;
  for (const auto& t : label_tokens) {
    double v;
    if (!parse_double(t, v)) {
      numeric = false;
      break;
    }
    numeric_value[t] = v;
  }
  std::vector<std::string> distinct;
  for (const auto& t : label_tokens) {
    if (std::find(distinct.begin(), distinct.end(), t) == distinct.end()) distinct.push_back(t);
  }
  if (numeric) {
    std::stable_sort(distinct.begin(), distinct.end(), [&](const std::string& a, const std::string& b) {
      return numeric_value.at(a) < numeric_value.at(b);
    });
    // "1" and "1.0" name the same class.
    distinct.erase(std::unique(distinct.begin(), distinct.end(),
                               [&](const std::string& a, const std::string& b) {
                                 return numeric_value.at(a) == numeric_value.at(b);
                               }),
                   distinct.end());
  } else {
    std::sort(distinct.begin(), distinct.end());
  }
  ds.class_names = distinct;
  ds.n_classes = static_cast<int>(distinct.size());
  for (const auto& t : label_tokens) {
    const auto it = std::find_if(distinct.begin(), distinct.end(), [&](const std::string& d) {
      return numeric ? numeric_value.at(d) == numeric_value.at(t) : d == t;
    });
    ds.y.push_back(static_cast<int>(it - distinct.begin()));
  }
  return ds;
}

Dataset load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot read dataset file '" + path + "'");
  return parse_csv(in, opts);
}

Bounds compute_bounds(const Dataset& ds, std::span<const std::size_t> rows) {
  if (rows.empty()) throw DatasetError("cannot compute normalization bounds over zero rows");
  Bounds b;
  b.min.assign(ds.features(), std::numeric_limits<double>::infinity());
  b.max.assign(ds.features(), -std::numeric_limits<double>::infinity());
  for (std::size_t r : rows) {
    for (std::size_t c = 0; c < ds.features(); ++c) {
      b.min[c] = std::min(b.min[c], ds.x(r, c));
      b.max[c] = std::max(b.max[c], ds.x(r, c));
    }
  }
  return b;
}

Bounds identity_bounds(std::size_t features) {
  return Bounds{std::vector<double>(features, 0.0), std::vector<double>(features, 1.0)};
}

Dataset normalize(const Dataset& ds, const Bounds& bounds) {
  if (bounds.min.size() != ds.features() || bounds.max.size() != ds.features()) {
    throw InvalidArgument("normalization bounds do not match the feature count");
  }
  Dataset out = ds;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t c = 0; c < ds.features(); ++c) {
      const double range = bounds.max[c] - bounds.min[c];
      out.x(r, c) = range > 0.0 ? std::clamp((ds.x(r, c) - bounds.min[c]) / range, 0.0, 1.0) : 0.0;
    }
  }
  return out;
}

Split stratified_split(const Dataset& ds, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw InvalidArgument("train fraction must be in (0, 1)");
  const auto classes = static_cast<std::size_t>(ds.n_classes);
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < ds.size(); ++i) members[static_cast<std::size_t>(ds.y[i])].push_back(i);
  for (std::size_t c = 0; c < classes; ++c) {
    if (members[c].size() < 2) {
      throw StratificationError("class " + std::to_string(c) + " has " +
                                std::to_string(members[c].size()) + " sample(s); need at least 2");
    }
  }

  std::vector<int> quota(classes);
  std::vector<double> frac(classes);
  int assigned = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double exact = train_frac * static_cast<double>(members[c].size());
    quota[c] = static_cast<int>(floor_eps(exact));
    frac[c] = std::max(0.0, exact - quota[c]);
    assigned += quota[c];
  }
  const int total = static_cast<int>(floor_eps(train_frac * static_cast<double>(ds.size())));
  std::vector<std::size_t> order(classes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (int k = 0; k < total - assigned; ++k) ++quota[order[static_cast<std::size_t>(k) % classes]];

  Split s;
  s.seed = seed;
  Rng rng(derive_seed(seed, 0x5317u));
  for (std::size_t c = 0; c < classes; ++c) {
    auto idx = members[c];
    shuffle(std::span<std::size_t>(idx), rng);
    const auto q = static_cast<std::size_t>(quota[c]);
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(q));
    s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(q), idx.end());
    s.train_per_class.push_back(quota[c]);
    s.test_per_class.push_back(static_cast<int>(idx.size() - q));
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out;
  out.feature_names = ds.feature_names;
  out.class_names = ds.class_names;
  out.n_classes = ds.n_classes;
  out.x = FeatureMatrix(0, ds.features());
  for (std::size_t r : rows) {
    if (r >= ds.size()) throw InvalidArgument("subset row out of range");
    out.x.append_row(ds.x.row(r));
    out.y.push_back(ds.y[r]);
  }
  return out;
}

void write_csv(const Dataset& ds, std::ostream& out) {
  for (const auto& n : ds.feature_names) out << n << ',';
  out << "label\n";
  char buf[64];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t c = 0; c < ds.features(); ++c) {
      std::snprintf(buf, sizeof buf, "%.6g", ds.x(r, c));
      out << buf << ',';
    }
    out << ds.class_names[static_cast<std::size_t>(ds.y[r])] << '\n';
  }
}

}  // namespace badc
