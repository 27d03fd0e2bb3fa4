#include "stiq/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "stiq/errors.hpp"
#include "stiq/rng.hpp"

namespace stiq {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<std::vector<double>> Dataset::rows(std::span<const std::size_t> indices) const {
  std::vector<std::vector<double>> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto r = row(i);
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

LabeledSet Dataset::select(std::span<const std::size_t> indices) const {
  LabeledSet set;
  set.x = rows(indices);
  set.y.reserve(indices.size());
  for (std::size_t i : indices) set.y.push_back(labels[i]);
  return set;
}

Dataset load_csv(const std::filesystem::path& path, std::span<const int> class_subset) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = split_fields(t);
    break;
  }
  if (header.empty()) throw DataError(path.string() + ": missing header");
  for (auto& h : header) h = trim(h);
  const auto label_it = std::find(header.begin(), header.end(), "label");
  if (label_it == header.end()) throw DataError(path.string() + ": no 'label' column in header");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t d = header.size() - 1;

  std::vector<double> features;
  std::vector<int> raw_labels;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split_fields(t);
    if (fields.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    int label = 0;
    if (!parse_number(trim(fields[label_col]), label)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": label '" +
                      fields[label_col] + "' is not an integer");
    }
    if (!class_subset.empty() &&
        std::find(class_subset.begin(), class_subset.end(), label) == class_subset.end()) {
      continue;
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j == label_col) continue;
      double value = 0.0;
      if (!parse_number(trim(fields[j]), value) || !std::isfinite(value)) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": feature '" +
                        header[j] + "' is not a finite number");
      }
      features.push_back(value);
    }
    raw_labels.push_back(label);
  }

  std::map<int, int> remap;
  for (int label : raw_labels) remap.emplace(label, 0);
  int next = 0;
  for (auto& [original, mapped] : remap) mapped = next++;

  Dataset ds;
  ds.name = path.stem().string();
  ds.n_features = d;
  ds.features = std::move(features);
  ds.n_classes = static_cast<int>(remap.size());
  ds.labels.reserve(raw_labels.size());
  for (int label : raw_labels) ds.labels.push_back(remap.at(label));
  return ds;
}

void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset '" + path.string() + "'");
  for (std::size_t j = 0; j < ds.n_features; ++j) out << 'f' << j << ',';
  out << "label\n";
  char buffer[40];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) {
      std::snprintf(buffer, sizeof buffer, "%.17g", v);
      out << buffer << ',';
    }
    out << ds.labels[i] << '\n';
  }
}

Dataset stratified_split(Dataset ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.n_classes));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  }
  const Rng root(seed);
  ds.train.clear();
  ds.test.clear();
  for (std::size_t k = 0; k < by_class.size(); ++k) {
    auto& members = by_class[k];
    if (members.size() < 2) {
      throw DataError("class " + std::to_string(k) + " has fewer than 2 samples");
    }
    Rng rng = root.split(k);
    shuffle(members, rng);
    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    ds.train.insert(ds.train.end(), members.begin(), members.begin() + n_train);
    ds.test.insert(ds.test.end(), members.begin() + n_train, members.end());
  }
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.test.begin(), ds.test.end());
  return ds;
}

Dataset synth_blobs(int n_classes, int d, int n_samples, double separation, std::uint64_t seed) {
  if (n_classes < 1 || d < 1 || n_samples < 1) {
    throw std::invalid_argument("synth_blobs: classes, dimension and samples must be positive");
  }
  if (!(separation >= 0.0)) throw std::invalid_argument("synth_blobs: separation must be >= 0");
  const Rng root(seed);
  Rng center_rng = root.split(1);
  Rng noise_rng = root.split(2);

  std::vector<double> centers(static_cast<std::size_t>(n_classes * d));
  for (auto& c : centers) c = separation * center_rng.normal();

  Dataset ds;
  ds.name = "blobs";
  ds.n_features = static_cast<std::size_t>(d);
  ds.n_classes = n_classes;
  ds.features.reserve(static_cast<std::size_t>(n_samples * d));
  for (int i = 0; i < n_samples; ++i) {
    const int label = i % n_classes;
    for (int j = 0; j < d; ++j) {
      ds.features.push_back(centers[static_cast<std::size_t>(label * d + j)] + noise_rng.normal());
    }
    ds.labels.push_back(label);
  }
  return ds;
}

}  // namespace stiq
