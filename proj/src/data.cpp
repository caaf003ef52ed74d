#include "osem/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "osem/errors.hpp"
#include "osem/log.hpp"

namespace osem {

OrdinalDataset::OrdinalDataset(std::vector<std::string> names, std::vector<int> levels,
                               std::vector<int> codes)
    : names_(std::move(names)), levels_(std::move(levels)), codes_(std::move(codes)) {
  const std::size_t n = levels_.size();
  if (names_.empty()) names_ = default_names(n);
  if (names_.size() != n) throw InputError("dataset: name count does not match column count");
  if (n == 0) {
    if (!codes_.empty()) throw InputError("dataset: codes given without columns");
    return;
  }
  if (codes_.size() % n != 0) throw InputError("dataset: code count is not a multiple of n");
  rows_ = codes_.size() / n;
  for (std::size_t c = 0; c < n; ++c) {
    if (levels_[c] < 1) throw InputError("dataset: column '" + names_[c] + "' has no levels");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const int v = codes_[r * n + c];
      if (v < 0 || v >= levels_[c]) {
        throw InputError("dataset: code " + std::to_string(v) + " in column '" + names_[c] +
                         "' (row " + std::to_string(r) + ") outside [0, " +
                         std::to_string(levels_[c]) + ")");
      }
    }
  }
}

std::vector<int> OrdinalDataset::column(std::size_t c) const {
  std::vector<int> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
  return out;
}

OrdinalDataset OrdinalDataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<int> codes;
  codes.reserve(rows.size() * cols());
  for (std::size_t r : rows) {
    if (r >= rows_) throw InputError("dataset: row index out of range");
    auto src = row(r);
    codes.insert(codes.end(), src.begin(), src.end());
  }
  return OrdinalDataset(names_, levels_, std::move(codes));
}

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = "X" + std::to_string(i + 1);
  return names;
}

OrdinalDataset merge_unobserved_levels(const OrdinalDataset& data) {
  std::vector<int> levels = data.levels();
  for (std::size_t c = 0; c < data.cols(); ++c) {
    int top = 0;
    for (std::size_t r = 0; r < data.rows(); ++r) top = std::max(top, data.at(r, c));
    if (data.rows() > 0 && top + 1 < levels[c]) {
      warn("column '" + data.names()[c] + "': levels " + std::to_string(top + 1) + ".." +
           std::to_string(levels[c] - 1) + " never observed; merged into level " +
           std::to_string(top));
      levels[c] = top + 1;
    }
  }
  return OrdinalDataset(data.names(), std::move(levels), data.codes());
}

void require_non_degenerate(const OrdinalDataset& data) {
  for (std::size_t c = 0; c < data.cols(); ++c) {
    bool varies = false;
    for (std::size_t r = 1; r < data.rows() && !varies; ++r) varies = data.at(r, c) != data.at(0, c);
    if (!varies) {
      throw InputError("column '" + data.names()[c] + "' is constant (fewer than two observed levels)");
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    field.erase(0, field.find_first_not_of(" \t\r\""));
    const auto last = field.find_last_not_of(" \t\r\"");
    field.erase(last == std::string::npos ? 0 : last + 1);
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

OrdinalDataset read_dataset_csv(const std::filesystem::path& path,
                                std::optional<std::vector<int>> levels) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw InputError("dataset '" + path.string() + "' is empty");
  auto names = split_csv_line(line);
  const std::size_t n = names.size();
  std::vector<int> codes;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != n) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(n) + " fields, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      int v = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": '" + f +
                         "' is not an integer level code");
      }
      codes.push_back(v);
    }
  }
  std::vector<int> lv;
  if (levels) {
    lv = std::move(*levels);
    if (lv.size() != n) throw InputError("level declaration does not match column count");
  } else {
    lv.assign(n, 1);
    for (std::size_t i = 0; i < codes.size(); ++i) {
      lv[i % n] = std::max(lv[i % n], codes[i] + 1);
    }
  }
  return OrdinalDataset(std::move(names), std::move(lv), std::move(codes));
}

void write_dataset_csv(const std::filesystem::path& path, const OrdinalDataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (std::size_t c = 0; c < data.cols(); ++c) out << (c ? "," : "") << data.names()[c];
  out << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) out << (c ? "," : "") << data.at(r, c);
    out << '\n';
  }
}

}  // namespace osem
