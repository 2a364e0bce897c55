#include "aae/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace aae {

void Dataset::validate() const {
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n || session_ids.size() != n || speaker_ids.size() != n) {
    throw ShapeError("dataset: per-row lists must all have length " + std::to_string(n));
  }
  if (feature_names.size() != static_cast<std::size_t>(features.cols())) {
    throw ShapeError("dataset: feature_names length " + std::to_string(feature_names.size()) +
                     " != feature count " + std::to_string(features.cols()));
  }
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.labels.reserve(rows.size());
  out.session_ids.reserve(rows.size());
  out.speaker_ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || r >= num_rows()) throw ValidationError("subset: row index out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
    out.labels.push_back(labels[r]);
    out.session_ids.push_back(session_ids[r]);
    out.speaker_ids.push_back(speaker_ids[r]);
  }
  return out;
}

std::vector<std::string> Dataset::class_set() const {
  std::set<std::string> s(labels.begin(), labels.end());
  return {s.begin(), s.end()};
}

std::vector<std::string> Dataset::session_set() const {
  std::set<std::string> s(session_ids.begin(), session_ids.end());
  return {s.begin(), s.end()};
}

std::vector<int> Dataset::rows_in_sessions(const std::set<std::string>& sessions) const {
  std::vector<int> rows;
  for (int r = 0; r < num_rows(); ++r) {
    if (sessions.count(session_ids[r])) rows.push_back(r);
  }
  return rows;
}

std::vector<int> Dataset::rows_not_in_sessions(const std::set<std::string>& sessions) const {
  std::vector<int> rows;
  for (int r = 0; r < num_rows(); ++r) {
    if (!sessions.count(session_ids[r])) rows.push_back(r);
  }
  return rows;
}

Dataset Dataset::concat(const Dataset& a, const Dataset& b) {
  if (a.num_features() != b.num_features()) {
    throw ShapeError("concat: feature dimensions differ");
  }
  Dataset out;
  out.feature_names = a.feature_names;
  out.features.resize(a.num_rows() + b.num_rows(), a.num_features());
  out.features.topRows(a.num_rows()) = a.features;
  out.features.bottomRows(b.num_rows()) = b.features;
  auto append = [](std::vector<std::string> lhs, const std::vector<std::string>& rhs) {
    lhs.insert(lhs.end(), rhs.begin(), rhs.end());
    return lhs;
  };
  out.labels = append(a.labels, b.labels);
  out.session_ids = append(a.session_ids, b.session_ids);
  out.speaker_ids = append(a.speaker_ids, b.speaker_ids);
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, delimiter)) cells.push_back(cell);
  if (!line.empty() && line.back() == delimiter) cells.push_back("");
  return cells;
}

std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_numeric(const std::string& cell, int row, const std::string& column) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(cell, &consumed);
    if (consumed != strip(cell).size() && consumed != cell.size()) {
      throw std::invalid_argument(cell);
    }
    return value;
  } catch (const std::exception&) {
    throw ParseError("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                     ", column '" + column + "'");
  }
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& session_column, const std::string& speaker_column,
                 char delimiter) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw ParseError("empty CSV file: " + path);
  const auto header = split_line(strip(header_line), delimiter);

  int label_idx = -1, session_idx = -1, speaker_idx = -1;
  std::vector<int> feature_columns;
  Dataset out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = strip(header[i]);
    if (name == label_column) {
      label_idx = static_cast<int>(i);
    } else if (!session_column.empty() && name == session_column) {
      session_idx = static_cast<int>(i);
    } else if (!speaker_column.empty() && name == speaker_column) {
      speaker_idx = static_cast<int>(i);
    } else {
      feature_columns.push_back(static_cast<int>(i));
      out.feature_names.push_back(name);
    }
  }
  if (label_idx < 0) {
    throw ParseError("CSV file " + path + " is missing the label column '" + label_column + "'");
  }

  std::vector<std::vector<double>> rows;
  std::string line;
  int row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    const std::string trimmed = strip(line);
    if (trimmed.empty()) continue;
    const auto cells = split_line(trimmed, delimiter);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(row_number) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    }
    std::vector<double> values;
    values.reserve(feature_columns.size());
    for (std::size_t f = 0; f < feature_columns.size(); ++f) {
      values.push_back(parse_numeric(cells[feature_columns[f]], row_number, out.feature_names[f]));
    }
    rows.push_back(std::move(values));
    out.labels.push_back(strip(cells[label_idx]));
    out.session_ids.push_back(session_idx >= 0 ? strip(cells[session_idx]) : "s0");
    out.speaker_ids.push_back(speaker_idx >= 0 ? strip(cells[speaker_idx]) : "spk0");
  }
  out.features.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(feature_columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  out.validate();
  return out;
}

void save_csv(const Dataset& dataset, const std::string& path, char delimiter) {
  dataset.validate();
  std::ofstream outfile(path);
  if (!outfile) throw IoError("cannot write CSV file: " + path);
  for (const auto& name : dataset.feature_names) outfile << name << delimiter;
  outfile << "label" << delimiter << "session" << delimiter << "speaker\n";
  for (int r = 0; r < dataset.num_rows(); ++r) {
    for (int c = 0; c < dataset.num_features(); ++c) {
      outfile << format_double(dataset.features(r, c)) << delimiter;
    }
    outfile << dataset.labels[r] << delimiter << dataset.session_ids[r] << delimiter
            << dataset.speaker_ids[r] << "\n";
  }
  if (!outfile) throw IoError("failed writing CSV file: " + path);
}

namespace {

struct ArffAttribute {
  enum class Kind { Numeric, Nominal, Text };
  std::string name;
  Kind kind;
  std::set<std::string> nominal_values;
};

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                        (s.front() == '"' && s.back() == '"'))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

}  // namespace

Dataset load_arff(const std::string& path, const ArffOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ARFF file: " + path);

  std::vector<ArffAttribute> attributes;
  std::string line;
  int line_number = 0;
  bool in_data = false;

  std::vector<std::vector<std::string>> data_rows;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string trimmed = strip(line);
    if (trimmed.empty() || trimmed[0] == '%') continue;
    if (!in_data) {
      const std::string lower = lowercase(trimmed);
      if (lower.rfind("@relation", 0) == 0) continue;
      if (lower.rfind("@attribute", 0) == 0) {
        std::string rest = strip(trimmed.substr(std::string("@attribute").size()));
        if (rest.empty()) {
          throw ParseError("line " + std::to_string(line_number) + ": malformed @attribute");
        }
        ArffAttribute attr;
        if (rest[0] == '\'' || rest[0] == '"') {
          const char quote = rest[0];
          const auto close = rest.find(quote, 1);
          if (close == std::string::npos) {
            throw ParseError("line " + std::to_string(line_number) + ": unterminated quoted name");
          }
          attr.name = rest.substr(1, close - 1);
          rest = strip(rest.substr(close + 1));
        } else {
          const auto space = rest.find_first_of(" \t");
          if (space == std::string::npos) {
            throw ParseError("line " + std::to_string(line_number) + ": @attribute needs a type");
          }
          attr.name = rest.substr(0, space);
          rest = strip(rest.substr(space));
        }
        const std::string type_lower = lowercase(rest);
        if (type_lower == "numeric" || type_lower == "real" || type_lower == "integer") {
          attr.kind = ArffAttribute::Kind::Numeric;
        } else if (type_lower == "string") {
          attr.kind = ArffAttribute::Kind::Text;
        } else if (!rest.empty() && rest.front() == '{' && rest.back() == '}') {
          attr.kind = ArffAttribute::Kind::Nominal;
          for (const auto& value : split_line(rest.substr(1, rest.size() - 2), ',')) {
            attr.nominal_values.insert(unquote(strip(value)));
          }
          if (attr.nominal_values.empty()) {
            throw ParseError("line " + std::to_string(line_number) + ": empty nominal set");
          }
        } else {
          throw ParseError("line " + std::to_string(line_number) + ": unsupported attribute type '" +
                           rest + "'");
        }
        attributes.push_back(std::move(attr));
        continue;
      }
      if (lower.rfind("@data", 0) == 0) {
        if (attributes.empty()) {
          throw ParseError("line " + std::to_string(line_number) + ": @data before any @attribute");
        }
        in_data = true;
        continue;
      }
      throw ParseError("line " + std::to_string(line_number) + ": unexpected content '" + trimmed +
                       "' before @data");
    }
    auto cells = split_line(trimmed, ',');
    if (cells.size() != attributes.size()) {
      throw ParseError("line " + std::to_string(line_number) + ": " + std::to_string(cells.size()) +
                       " values for " + std::to_string(attributes.size()) + " attributes");
    }
    for (auto& cell : cells) cell = unquote(strip(cell));
    data_rows.push_back(std::move(cells));
  }
  if (!in_data) throw ParseError("ARFF file " + path + " has no @data section");

  // The nominal attribute is the class; a string attribute carries the
  // utterance name that session/speaker ids are extracted from.
  int class_idx = -1, name_idx = -1;
  std::vector<int> numeric_columns;
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    switch (attributes[i].kind) {
      case ArffAttribute::Kind::Numeric:
        numeric_columns.push_back(static_cast<int>(i));
        break;
      case ArffAttribute::Kind::Nominal:
        class_idx = static_cast<int>(i);
        break;
      case ArffAttribute::Kind::Text:
        name_idx = static_cast<int>(i);
        break;
    }
  }
  if (class_idx < 0) throw ParseError("ARFF file " + path + " has no nominal class attribute");

  const std::regex session_re(options.session_pattern);
  const std::regex speaker_re(options.speaker_pattern);

  Dataset out;
  for (int c : numeric_columns) out.feature_names.push_back(attributes[c].name);
  out.features.resize(static_cast<Eigen::Index>(data_rows.size()),
                      static_cast<Eigen::Index>(numeric_columns.size()));
  for (std::size_t r = 0; r < data_rows.size(); ++r) {
    const auto& cells = data_rows[r];
    for (std::size_t f = 0; f < numeric_columns.size(); ++f) {
      out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) =
          parse_numeric(cells[numeric_columns[f]], static_cast<int>(r) + 1,
                        attributes[numeric_columns[f]].name);
    }
    const std::string& label = cells[class_idx];
    if (!attributes[class_idx].nominal_values.count(label)) {
      throw ParseError("data row " + std::to_string(r + 1) + ": class value '" + label +
                       "' is not in the declared nominal set");
    }
    out.labels.push_back(label);
    std::string session = "s0";
    std::string speaker = "spk0";
    if (name_idx >= 0) {
      const std::string& name = cells[name_idx];
      std::smatch match;
      if (std::regex_search(name, match, session_re) && match.size() > 1) {
        session = match[1].str();
      } else {
        session = name;
      }
      if (std::regex_search(name, match, speaker_re) && match.size() > 1) {
        speaker = session + "_" + match[1].str();
      } else {
        speaker = name;
      }
    }
    out.session_ids.push_back(session);
    out.speaker_ids.push_back(speaker);
  }
  out.validate();
  return out;
}

Standardizer standardize_fit(const Matrix& train_features) {
  if (train_features.rows() < 2) {
    throw ValidationError("standardize_fit: need at least 2 rows");
  }
  const double n = static_cast<double>(train_features.rows());
  Standardizer s;
  s.mean = train_features.colwise().mean();
  Matrix centered = train_features.rowwise() - s.mean.transpose();
  s.stddev = (centered.array().square().colwise().sum() / (n - 1.0)).sqrt();
  for (Eigen::Index c = 0; c < s.stddev.size(); ++c) {
    if (s.stddev(c) <= 0.0 || !std::isfinite(s.stddev(c))) {
      s.stddev(c) = 1.0;
      s.constant_features.push_back(static_cast<int>(c));
    }
  }
  return s;
}

Matrix standardize_apply(const Standardizer& s, const Matrix& features) {
  if (features.cols() != s.mean.size()) {
    throw ShapeError("standardize_apply: feature dimension mismatch");
  }
  Matrix out = features.rowwise() - s.mean.transpose();
  out.array().rowwise() /= s.stddev.transpose().array();
  return out;
}

Matrix standardize_invert(const Standardizer& s, const Matrix& standardized) {
  if (standardized.cols() != s.mean.size()) {
    throw ShapeError("standardize_invert: feature dimension mismatch");
  }
  Matrix out = standardized;
  out.array().rowwise() *= s.stddev.transpose().array();
  out.rowwise() += s.mean.transpose();
  return out;
}

FoldPlan make_session_folds(const Dataset& dataset) {
  const auto sessions = dataset.session_set();
  if (sessions.size() < 2) {
    throw ValidationError("make_session_folds: need at least 2 distinct sessions, got " +
                          std::to_string(sessions.size()));
  }
  FoldPlan plan;
  for (const auto& test_session : sessions) {
    FoldPlan::Fold fold;
    fold.test_sessions.insert(test_session);
    for (const auto& s : sessions) {
      if (s != test_session) fold.train_sessions.insert(s);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

void save_fold_plan(const FoldPlan& plan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write fold plan: " + path);
  for (std::size_t i = 0; i < plan.folds.size(); ++i) {
    out << "fold " << i << "\n";
    out << "  train:";
    for (const auto& s : plan.folds[i].train_sessions) out << " " << s;
    out << "\n  test:";
    for (const auto& s : plan.folds[i].test_sessions) out << " " << s;
    out << "\n";
  }
}

Dataset synth_blobs(const BlobSpec& spec) {
  if (spec.num_classes < 1 || spec.dim < 1 || spec.per_class < 1 || spec.num_sessions < 1) {
    throw ValidationError("synth_blobs: counts must be positive");
  }
  if (spec.noise_stddev < 0.0 || spec.separation < 0.0) {
    throw ValidationError("synth_blobs: separation and noise must be non-negative");
  }
  Rng rng(spec.seed);
  Rng center_rng = rng.derive("blob-centers");
  Rng noise_rng = rng.derive("blob-noise");

  Matrix centers(spec.num_classes, spec.dim);
  for (int c = 0; c < spec.num_classes; ++c) {
    Vector direction(spec.dim);
    for (int d = 0; d < spec.dim; ++d) direction(d) = center_rng.normal();
    direction.normalize();
    centers.row(c) = direction.transpose() * spec.separation;
  }

  Dataset out;
  const int n = spec.num_classes * spec.per_class;
  out.features.resize(n, spec.dim);
  out.feature_names.reserve(spec.dim);
  for (int d = 0; d < spec.dim; ++d) out.feature_names.push_back("f" + std::to_string(d));
  int row = 0;
  for (int c = 0; c < spec.num_classes; ++c) {
    const std::string label = "c" + std::to_string(c);
    for (int i = 0; i < spec.per_class; ++i, ++row) {
      for (int d = 0; d < spec.dim; ++d) {
        out.features(row, d) = centers(c, d) + spec.noise_stddev * noise_rng.normal();
      }
      out.labels.push_back(label);
      const int session = row % spec.num_sessions;
      out.session_ids.push_back("s" + std::to_string(session));
      // Two speakers per session, split by round-robin cycle parity.
      const int cycle = (row / spec.num_sessions) % 2;
      out.speaker_ids.push_back("s" + std::to_string(session) + (cycle == 0 ? "_a" : "_b"));
    }
  }
  out.validate();
  return out;
}

}  // namespace aae
