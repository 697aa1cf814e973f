#include "polyfilter/text_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace polyfilter {

namespace {

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) return line;
  throw std::runtime_error(std::string(what) + ": unexpected end of input");
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

long parse_int(const std::string& token, const char* what) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size() || v < 0)
    throw std::runtime_error(std::string(what) + ": bad integer '" + token + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  out.push_back(cell);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view token) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  return v;
}

void write_pce(std::ostream& out, const PceVector& q) {
  const auto& basis = q.basis();
  out << "pce " << q.dim() << ' ' << q.terms() << ' ' << q.germ_dim() << ' ' << basis.degree_bound();
  if (!q.label().empty()) out << ' ' << q.label();
  out << '\n';
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const auto dense = basis[j].dense(q.germ_dim());
    for (std::size_t k = 0; k < dense.size(); ++k) out << (k ? " " : "") << dense[k];
    for (std::size_t m = 0; m < q.dim(); ++m)
      out << ' ' << format_double(q.coeffs()(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)));
    out << '\n';
  }
}

PceVector read_pce(std::istream& in) {
  const auto header = split_ws(next_line(in, "read_pce"));
  if (header.size() < 5 || header[0] != "pce") throw std::runtime_error("read_pce: missing 'pce' header");
  const auto m = static_cast<std::size_t>(parse_int(header[1], "read_pce"));
  const auto j = static_cast<std::size_t>(parse_int(header[2], "read_pce"));
  const auto d = static_cast<std::size_t>(parse_int(header[3], "read_pce"));
  const auto p = parse_int(header[4], "read_pce");
  std::string label = header.size() > 5 ? header[5] : std::string{};
  std::vector<MultiIndex> indices;
  std::vector<Eigen::VectorXd> columns;
  for (std::size_t row = 0; row < j; ++row) {
    const auto tok = split_ws(next_line(in, "read_pce"));
    if (tok.size() != d + m) throw std::runtime_error("read_pce: line " + std::to_string(row + 2) + " has wrong width");
    std::vector<int> exps(d);
    for (std::size_t k = 0; k < d; ++k) exps[k] = static_cast<int>(parse_int(tok[k], "read_pce"));
    indices.emplace_back(std::span<const int>(exps));
    Eigen::VectorXd c(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) c(static_cast<Eigen::Index>(k)) = parse_double(tok[d + k]);
    columns.push_back(std::move(c));
  }
  auto basis = make_index_set(IndexSet(d, indices));
  if (basis->size() != j) throw std::runtime_error("read_pce: duplicate or missing basis indices");
  if (basis->degree_bound() != p) throw std::runtime_error("read_pce: degree bound does not match the indices");
  Eigen::MatrixXd coeffs(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j));
  for (std::size_t row = 0; row < j; ++row)
    coeffs.col(static_cast<Eigen::Index>(*basis->find(indices[row]))) = columns[row];
  return PceVector(basis, std::move(coeffs), std::move(label));
}

void save_pce(const std::filesystem::path& path, const PceVector& q) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_pce(out, q);
}

PceVector load_pce(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_pce(in);
}

void write_update_map(std::ostream& out, const UpdateMap& map) {
  out << "update_map " << map.degree() << ' ' << map.output_dim() << ' ' << map.measurement_dim() << '\n';
  out << "diagnostics " << format_double(map.diagnostics.condition_number) << ' '
      << (map.diagnostics.pseudo_inverse ? 1 : 0) << ' ' << format_double(map.diagnostics.loss) << '\n';
  for (int k = 0; k <= map.degree(); ++k) {
    const auto& b = map.block(k);
    out << "block " << k << ' ' << b.size() << '\n';
    for (std::size_t j = 0; j < b.size(); ++j) {
      bool first = true;
      for (int i : b.combos()[j]) {
        out << (first ? "" : " ") << i;
        first = false;
      }
      for (std::size_t m = 0; m < b.rows(); ++m) {
        out << (first ? "" : " ") << format_double(b.values()(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)));
        first = false;
      }
      out << '\n';
    }
  }
}

UpdateMap read_update_map(std::istream& in) {
  const auto header = split_ws(next_line(in, "read_update_map"));
  if (header.size() != 4 || header[0] != "update_map") throw std::runtime_error("read_update_map: missing header");
  const auto n = static_cast<int>(parse_int(header[1], "read_update_map"));
  const auto m = static_cast<std::size_t>(parse_int(header[2], "read_update_map"));
  const auto r = static_cast<std::size_t>(parse_int(header[3], "read_update_map"));
  UpdateMap map(n, m, r);
  const auto diag = split_ws(next_line(in, "read_update_map"));
  if (diag.size() != 4 || diag[0] != "diagnostics") throw std::runtime_error("read_update_map: missing diagnostics");
  map.diagnostics.condition_number = parse_double(diag[1]);
  map.diagnostics.pseudo_inverse = diag[2] == "1";
  map.diagnostics.loss = diag[3] == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(diag[3]);
  for (int k = 0; k <= n; ++k) {
    const auto bh = split_ws(next_line(in, "read_update_map"));
    if (bh.size() != 3 || bh[0] != "block" || parse_int(bh[1], "read_update_map") != k)
      throw std::runtime_error("read_update_map: expected block " + std::to_string(k));
    auto& b = map.block(k);
    const auto entries = static_cast<std::size_t>(parse_int(bh[2], "read_update_map"));
    if (entries != b.size()) throw std::runtime_error("read_update_map: block size mismatch");
    for (std::size_t e = 0; e < entries; ++e) {
      const auto tok = split_ws(next_line(in, "read_update_map"));
      if (tok.size() != static_cast<std::size_t>(k) + m) throw std::runtime_error("read_update_map: bad entry width");
      Combination c(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = static_cast<int>(parse_int(tok[static_cast<std::size_t>(i)], "read_update_map"));
      const auto pos = static_cast<Eigen::Index>(b.position(c));
      for (std::size_t row = 0; row < m; ++row)
        b.values()(static_cast<Eigen::Index>(row), pos) = parse_double(tok[static_cast<std::size_t>(k) + row]);
    }
  }
  return map;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("csv column '" + std::string(name) + "' not found");
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw std::invalid_argument("write_csv: row width does not match header in " + path.string());
    emit(row);
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty csv");
  t.header = split_csv(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split_csv(line));
  return t;
}

}  // namespace polyfilter
