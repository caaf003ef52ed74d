#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace osem {

/// N x n matrix of integer level codes; column i takes values in [0, levels[i]).
class OrdinalDataset {
 public:
  OrdinalDataset() = default;
  /// `codes` is row-major. Throws InputError on shape mismatch or out-of-range codes.
  OrdinalDataset(std::vector<std::string> names, std::vector<int> levels, std::vector<int> codes);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return levels_.size(); }
  int at(std::size_t row, std::size_t col) const { return codes_[row * cols() + col]; }
  std::span<const int> row(std::size_t r) const {
    return {codes_.data() + r * cols(), cols()};
  }
  std::vector<int> column(std::size_t c) const;

  const std::vector<int>& levels() const { return levels_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int>& codes() const { return codes_; }

  OrdinalDataset select_rows(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> names_;
  std::vector<int> levels_;
  std::vector<int> codes_;
  std::size_t rows_ = 0;
};

std::vector<std::string> default_names(std::size_t n);

/// Reduces each declared level count to (highest observed code + 1), warning
/// for every column whose top levels never occur.
OrdinalDataset merge_unobserved_levels(const OrdinalDataset& data);

/// Throws InputError naming the first column with fewer than two observed levels.
void require_non_degenerate(const OrdinalDataset& data);

/// CSV with a header row of variable names and integer codes 0..L-1.
/// Declared levels default to (max code + 1) per column.
OrdinalDataset read_dataset_csv(const std::filesystem::path& path,
                                std::optional<std::vector<int>> levels = std::nullopt);
void write_dataset_csv(const std::filesystem::path& path, const OrdinalDataset& data);

}  // namespace osem
