#include "lsam/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "lsam/rng.hpp"

namespace lsam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

// One logical CSV record; quoted fields may contain commas, doubled quotes
// and line breaks.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(field);
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (!any) return false;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(field);
  return true;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::int64_t TabularDataset::missing_count() const {
  std::int64_t n = 0;
  for (auto m : mask) n += m;
  return n;
}

void TabularDataset::set_missing(std::int64_t r, std::int64_t c) {
  mask[r * n_features() + c] = 1;
  values[r * n_features() + c] = kNaN;
}

TabularDataset TabularDataset::take_rows(const std::vector<std::int64_t>& rows) const {
  TabularDataset out;
  out.schema = schema;
  out.target_name = target_name;
  out.class_labels = class_labels;
  out.n_rows = static_cast<std::int64_t>(rows.size());
  const std::int64_t d = n_features();
  out.values.resize(out.n_rows * d);
  out.mask.resize(out.n_rows * d);
  out.targets.resize(out.n_rows);
  for (std::int64_t i = 0; i < out.n_rows; ++i) {
    const std::int64_t r = rows[static_cast<std::size_t>(i)];
    std::copy_n(values.begin() + r * d, d, out.values.begin() + i * d);
    std::copy_n(mask.begin() + r * d, d, out.mask.begin() + i * d);
    out.targets[static_cast<std::size_t>(i)] = targets[static_cast<std::size_t>(r)];
  }
  return out;
}

void TabularDataset::validate() const {
  const std::int64_t d = n_features();
  if (static_cast<std::int64_t>(values.size()) != n_rows * d ||
      static_cast<std::int64_t>(mask.size()) != n_rows * d ||
      static_cast<std::int64_t>(targets.size()) != n_rows) {
    throw DataError("dataset: buffer sizes do not match n_rows x d");
  }
  for (std::int64_t r = 0; r < n_rows; ++r) {
    for (std::int64_t c = 0; c < d; ++c) {
      const double v = values[r * d + c];
      if (missing(r, c) != std::isnan(v)) {
        throw DataError("dataset: mask and NaN sentinel disagree at row " +
                        std::to_string(r) + ", column " + std::to_string(c));
      }
      if (!missing(r, c) && schema[static_cast<std::size_t>(c)].kind == FeatureKind::kCategorical) {
        const auto card = schema[static_cast<std::size_t>(c)].cardinality();
        if (v < 0 || v >= static_cast<double>(card) || v != std::floor(v)) {
          throw DataError("dataset: categorical code out of range at row " +
                          std::to_string(r) + ", column " + std::to_string(c));
        }
      }
    }
    if (targets[static_cast<std::size_t>(r)] < 0 || targets[static_cast<std::size_t>(r)] >= n_classes()) {
      throw DataError("dataset: target out of range at row " + std::to_string(r));
    }
  }
}

TabularDataset load_csv(const std::string& path, const std::string& target_name,
                        const std::vector<FeatureSchema>* schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_csv: cannot open " + path);

  std::vector<std::string> header;
  if (!read_record(in, header)) throw DataError("load_csv: empty file " + path);

  std::int64_t target_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == target_name) target_col = static_cast<std::int64_t>(i);
  }
  if (target_col < 0) {
    throw DataError("load_csv: target column '" + target_name + "' not found in " + path);
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> rec;
  while (read_record(in, rec)) {
    if (rec.size() == 1 && rec[0].empty()) continue;  // trailing blank line
    if (rec.size() != header.size()) {
      throw DataError("load_csv: row " + std::to_string(rows.size() + 2) + " has " +
                      std::to_string(rec.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    rows.push_back(rec);
  }

  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  const std::int64_t d = static_cast<std::int64_t>(header.size()) - 1;

  // Column order: features keep their file order, target is pulled out.
  std::vector<std::int64_t> feat_cols;
  for (std::int64_t c = 0; c <= d; ++c)
    if (c != target_col) feat_cols.push_back(c);

  for (std::int64_t r = 0; r < n; ++r) {
    if (is_missing_token(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(target_col)])) {
      throw DataError("load_csv: missing target at row " + std::to_string(r + 2));
    }
  }

  TabularDataset out;
  out.target_name = target_name;
  out.n_rows = n;
  out.values.assign(static_cast<std::size_t>(n * d), kNaN);
  out.mask.assign(static_cast<std::size_t>(n * d), 0);
  out.targets.resize(static_cast<std::size_t>(n));

  // Feature schema: given or inferred.
  if (schema != nullptr) {
    if (static_cast<std::int64_t>(schema->size()) != d) {
      throw DataError("load_csv: schema has " + std::to_string(schema->size()) +
                      " features, file has " + std::to_string(d));
    }
    for (std::int64_t j = 0; j < d; ++j) {
      if ((*schema)[static_cast<std::size_t>(j)].name !=
          header[static_cast<std::size_t>(feat_cols[static_cast<std::size_t>(j)])]) {
        throw DataError("load_csv: schema column '" +
                        (*schema)[static_cast<std::size_t>(j)].name +
                        "' does not match header '" +
                        header[static_cast<std::size_t>(feat_cols[static_cast<std::size_t>(j)])] + "'");
      }
    }
    out.schema = *schema;
  } else {
    out.schema.resize(static_cast<std::size_t>(d));
    for (std::int64_t j = 0; j < d; ++j) {
      auto& fs = out.schema[static_cast<std::size_t>(j)];
      fs.name = header[static_cast<std::size_t>(feat_cols[static_cast<std::size_t>(j)])];
      bool numeric = true;
      std::set<std::string> levels;
      for (std::int64_t r = 0; r < n && numeric; ++r) {
        const std::string& cell =
            rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(feat_cols[static_cast<std::size_t>(j)])];
        if (is_missing_token(cell)) continue;
        double tmp;
        if (!parse_double(cell, tmp)) numeric = false;
      }
      if (numeric) {
        fs.kind = FeatureKind::kNumeric;
      } else {
        fs.kind = FeatureKind::kCategorical;
        for (std::int64_t r = 0; r < n; ++r) {
          const std::string& cell =
              rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(feat_cols[static_cast<std::size_t>(j)])];
          if (!is_missing_token(cell)) levels.insert(cell);
        }
        fs.levels.assign(levels.begin(), levels.end());  // lexicographic
      }
    }
  }

  // Fill the value matrix.
  for (std::int64_t j = 0; j < d; ++j) {
    const auto& fs = out.schema[static_cast<std::size_t>(j)];
    std::map<std::string, std::int64_t> code;
    for (std::size_t l = 0; l < fs.levels.size(); ++l)
      code[fs.levels[l]] = static_cast<std::int64_t>(l);
    for (std::int64_t r = 0; r < n; ++r) {
      const std::string& cell =
          rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(feat_cols[static_cast<std::size_t>(j)])];
      if (is_missing_token(cell)) {
        out.mask[r * d + j] = 1;
        continue;
      }
      if (fs.kind == FeatureKind::kNumeric) {
        double v;
        if (!parse_double(cell, v)) {
          throw DataError("load_csv: cannot parse numeric value '" + cell + "' at row " +
                          std::to_string(r + 2) + ", column '" + fs.name + "'");
        }
        out.values[r * d + j] = v;
      } else {
        auto it = code.find(cell);
        if (it == code.end()) {
          throw DataError("load_csv: unknown level '" + cell + "' at row " +
                          std::to_string(r + 2) + ", column '" + fs.name + "'");
        }
        out.values[r * d + j] = static_cast<double>(it->second);
      }
    }
  }

  // Targets: numeric order when every label is an integer, else
  // lexicographic.
  {
    std::set<std::string> labels;
    for (std::int64_t r = 0; r < n; ++r)
      labels.insert(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(target_col)]);
    std::vector<std::string> ordered(labels.begin(), labels.end());
    bool all_int = true;
    for (const auto& s : ordered) {
      long long tmp;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), tmp);
      if (ec != std::errc{} || p != s.data() + s.size()) all_int = false;
    }
    if (all_int) {
      std::sort(ordered.begin(), ordered.end(), [](const std::string& a, const std::string& b) {
        return std::stoll(a) < std::stoll(b);
      });
    }
    std::map<std::string, std::int32_t> code;
    for (std::size_t i = 0; i < ordered.size(); ++i)
      code[ordered[i]] = static_cast<std::int32_t>(i);
    out.class_labels = ordered;
    for (std::int64_t r = 0; r < n; ++r)
      out.targets[static_cast<std::size_t>(r)] =
          code[rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(target_col)]];
  }

  out.validate();
  return out;
}

void write_csv(const TabularDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_csv: cannot open " + path);
  const std::int64_t d = data.n_features();
  for (std::int64_t j = 0; j < d; ++j) {
    out << csv_quote(data.schema[static_cast<std::size_t>(j)].name) << ",";
  }
  out << csv_quote(data.target_name) << "\n";
  for (std::int64_t r = 0; r < data.n_rows; ++r) {
    for (std::int64_t j = 0; j < d; ++j) {
      if (!data.missing(r, j)) {
        const auto& fs = data.schema[static_cast<std::size_t>(j)];
        if (fs.kind == FeatureKind::kNumeric) {
          out << format_double(data.value(r, j));
        } else {
          out << csv_quote(fs.levels[static_cast<std::size_t>(data.value(r, j))]);
        }
      }
      out << ",";
    }
    out << csv_quote(data.class_labels[static_cast<std::size_t>(data.targets[static_cast<std::size_t>(r)])])
        << "\n";
  }
}

Standardizer Standardizer::fit(const TabularDataset& train) {
  Standardizer s;
  const std::int64_t d = train.n_features();
  s.stats.resize(static_cast<std::size_t>(d));
  for (std::int64_t j = 0; j < d; ++j) {
    auto& st = s.stats[static_cast<std::size_t>(j)];
    if (train.schema[static_cast<std::size_t>(j)].kind == FeatureKind::kCategorical) continue;
    double sum = 0.0;
    std::int64_t cnt = 0;
    for (std::int64_t r = 0; r < train.n_rows; ++r) {
      if (train.missing(r, j)) continue;
      sum += train.value(r, j);
      ++cnt;
    }
    if (cnt == 0) {
      st.constant = true;
      continue;
    }
    st.mean = sum / static_cast<double>(cnt);
    double ss = 0.0;
    for (std::int64_t r = 0; r < train.n_rows; ++r) {
      if (train.missing(r, j)) continue;
      const double c = train.value(r, j) - st.mean;
      ss += c * c;
    }
    const double var = ss / static_cast<double>(cnt);
    if (var == 0.0) {
      st.constant = true;  // scale stays 1
    } else {
      st.scale = std::sqrt(var);
    }
  }
  return s;
}

TabularDataset Standardizer::apply(const TabularDataset& data) const {
  if (stats.size() != static_cast<std::size_t>(data.n_features())) {
    throw DataError("standardize: statistics were fit on a different feature count");
  }
  TabularDataset out = data;
  const std::int64_t d = data.n_features();
  for (std::int64_t j = 0; j < d; ++j) {
    if (data.schema[static_cast<std::size_t>(j)].kind == FeatureKind::kCategorical) continue;
    const auto& st = stats[static_cast<std::size_t>(j)];
    if (st.constant) continue;
    for (std::int64_t r = 0; r < data.n_rows; ++r) {
      if (out.missing(r, j)) continue;
      out.values[r * d + j] = (out.values[r * d + j] - st.mean) / st.scale;
    }
  }
  return out;
}

Splits split(const TabularDataset& data, const SplitSpec& spec) {
  const double fsum = spec.train_fraction + spec.valid_fraction + spec.test_fraction;
  if (spec.train_fraction < 0 || spec.valid_fraction < 0 || spec.test_fraction < 0 ||
      std::abs(fsum - 1.0) > 1e-9) {
    throw ConfigError("split: fractions must be nonnegative and sum to 1");
  }
  const double fracs[3] = {spec.train_fraction, spec.valid_fraction, spec.test_fraction};
  int active = 0;
  for (double f : fracs) active += f > 0.0;

  std::vector<std::vector<std::int64_t>> by_class(static_cast<std::size_t>(data.n_classes()));
  for (std::int64_t r = 0; r < data.n_rows; ++r)
    by_class[static_cast<std::size_t>(data.targets[static_cast<std::size_t>(r)])].push_back(r);

  Rng rng(spec.seed);
  std::vector<std::int64_t> part[3];
  for (auto& rows : by_class) {
    const std::int64_t nc = static_cast<std::int64_t>(rows.size());
    if (nc < active) {
      throw DataError("split: a class has " + std::to_string(nc) +
                      " rows, fewer than the " + std::to_string(active) + " splits");
    }
    // Fisher-Yates with our own generator (platform-stable).
    for (std::int64_t i = nc - 1; i > 0; --i) {
      const std::int64_t j = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
    // Quotas: one row guaranteed per active split, remainder by largest
    // remainder so counts are exhaustive and within 1 of proportional.
    std::int64_t quota[3] = {0, 0, 0};
    std::int64_t assigned = 0;
    double rem[3] = {0, 0, 0};
    for (int s = 0; s < 3; ++s) {
      if (fracs[s] <= 0.0) continue;
      const double want = fracs[s] * static_cast<double>(nc);
      quota[s] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(want)));
      rem[s] = want - std::floor(want);
      assigned += quota[s];
    }
    while (assigned < nc) {
      int best = -1;
      for (int s = 0; s < 3; ++s) {
        if (fracs[s] <= 0.0) continue;
        if (best < 0 || rem[s] > rem[best]) best = s;
      }
      quota[best] += 1;
      rem[best] -= 1.0;
      ++assigned;
    }
    while (assigned > nc) {  // the >=1 guarantee can overshoot on tiny classes
      int best = -1;
      for (int s = 0; s < 3; ++s) {
        if (fracs[s] <= 0.0 || quota[s] <= 1) continue;
        if (best < 0 || rem[s] < rem[best]) best = s;
      }
      quota[best] -= 1;
      rem[best] += 1.0;
      --assigned;
    }
    std::int64_t off = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::int64_t i = 0; i < quota[s]; ++i)
        part[s].push_back(rows[static_cast<std::size_t>(off + i)]);
      off += quota[s];
    }
  }
  for (auto& p : part) std::sort(p.begin(), p.end());
  return Splits{data.take_rows(part[0]), data.take_rows(part[1]), data.take_rows(part[2])};
}

}  // namespace lsam
