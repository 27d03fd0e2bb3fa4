#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stiq {

/// Rows and integer labels ready for a model (already scaled when produced
/// by the harness).
struct LabeledSet {
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
};

struct Dataset {
  std::string name;
  std::size_t n_features = 0;
  std::vector<double> features;  // row-major, size() x n_features
  std::vector<int> labels;       // values in [0, n_classes)
  int n_classes = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * n_features, n_features};
  }
  std::vector<std::vector<double>> rows(std::span<const std::size_t> indices) const;
  LabeledSet select(std::span<const std::size_t> indices) const;
};

/// Reads the `f0,...,f{d-1},label` CSV contract. Lines starting with '#' and
/// blank lines are skipped. When `class_subset` is non-empty only rows whose
/// label is listed are kept. Labels are remapped to [0, k) in ascending order
/// of the original label values.
Dataset load_csv(const std::filesystem::path& path, std::span<const int> class_subset = {});

/// Writes the same contract with 17 significant digits (bit-exact reload).
void save_csv(const Dataset& ds, const std::filesystem::path& path);

/// Per-class proportional split after a seeded shuffle. Each class must have
/// at least two samples; train_fraction must lie strictly inside (0, 1).
Dataset stratified_split(Dataset ds, double train_fraction, std::uint64_t seed);

/// Gaussian blobs: class centers ~ separation * N(0, I), unit-variance noise.
/// Sample i belongs to class i mod n_classes.
Dataset synth_blobs(int n_classes, int d, int n_samples, double separation, std::uint64_t seed);

}  // namespace stiq
