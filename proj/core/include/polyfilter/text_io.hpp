#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "polyfilter/pce.hpp"
#include "polyfilter/update.hpp"

namespace polyfilter {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);
/// Strict parse of a full token; throws std::invalid_argument.
double parse_double(std::string_view token);

/// Text layout:
///   pce <M> <J> <germ_dim> <degree_bound> [label]
///   <germ_dim exponents> <M coefficients>      (J lines, basis order)
void write_pce(std::ostream& out, const PceVector& q);
PceVector read_pce(std::istream& in);
void save_pce(const std::filesystem::path& path, const PceVector& q);
PceVector load_pce(const std::filesystem::path& path);

/// Text layout:
///   update_map <degree> <M> <R>
///   diagnostics <condition_number> <pseudo_inverse 0|1> <loss>
///   block <k> <entries>                        (k = 0..degree)
///   <k sorted indices> <M values>              (one line per entry)
void write_update_map(std::ostream& out, const UpdateMap& map);
UpdateMap read_update_map(std::istream& in);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; throws std::out_of_range when absent.
  std::size_t column(std::string_view name) const;
};

/// Rows of preformatted cells; every row must match the header width.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace polyfilter
