#include <algorithm>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "forestore/errors.hpp"
#include "forestore/selection.hpp"
#include "text.hpp"

namespace forestore {

namespace {

std::string number(double v) { return detail::shortest(v); }

// Accumulates "+ c name" terms and wraps long rows.
class Row {
 public:
  explicit Row(std::ostream& out) : out_(out) {}

  void term(double coef, const std::string& name) {
    if (coef == 0.0) return;
    std::string piece = coef < 0 ? " - " : (first_ ? " " : " + ");
    const double mag = coef < 0 ? -coef : coef;
    if (mag != 1.0) piece += number(mag) + " ";
    piece += name;
    if (width_ + piece.size() > 200) {
      out_ << "\n   ";
      width_ = 3;
    }
    out_ << piece;
    width_ += piece.size();
    first_ = false;
  }

  void begin(const std::string& label) {
    out_ << ' ' << label << ':';
    width_ = label.size() + 2;
    first_ = true;
  }

  void end(const char* sense, double rhs) {
    if (first_) out_ << " 0 sel_0";
    out_ << ' ' << sense << ' ' << number(rhs) << '\n';
  }

 private:
  std::ostream& out_;
  std::size_t width_ = 0;
  bool first_ = true;
};

std::string sel(std::size_t j) { return "sel_" + std::to_string(j); }
std::string cov(std::size_t i) { return "cov_" + std::to_string(i); }
std::string err(std::size_t i) { return "err_" + std::to_string(i); }
std::string ovl(std::size_t i) { return "ovl_" + std::to_string(i); }

}  // namespace

void write_lp(const SelectionProblem& p, std::ostream& out) {
  const double mc = static_cast<double>(p.params.maxcover);
  const double n = static_cast<double>(p.n);

  // Per-instance rule lists with signs for P (ok +1, nok -1).
  std::vector<std::vector<std::pair<std::size_t, int>>> by_row(p.n);
  for (std::size_t j = 0; j < p.m; ++j) {
    for (uint32_t i : p.ok_rows[j]) by_row[i].push_back({j, +1});
    for (uint32_t i : p.nok_rows[j]) by_row[i].push_back({j, -1});
  }
  for (auto& row : by_row) std::sort(row.begin(), row.end());

  out << "\\ rule selection model: " << p.m << " rules, " << p.n << " instances\n";
  out << "Minimize\n";
  Row row(out);
  row.begin("obj");
  for (std::size_t j = 0; j < p.m; ++j) row.term(p.rule_cost(j), sel(j));
  out << '\n';

  out << "Subject To\n";
  for (std::size_t i = 0; i < p.n; ++i) {
    if (by_row[i].empty()) continue;
    row.begin("maxcover_" + std::to_string(i));
    for (auto [j, s] : by_row[i]) row.term(1.0, sel(j));
    row.end("<=", mc);
  }
  for (std::size_t i = 0; i < p.n; ++i) {
    row.begin("error_up_" + std::to_string(i));
    for (auto [j, s] : by_row[i]) row.term(s, sel(j));
    row.term(mc, err(i));
    row.end("<=", mc);
    row.begin("error_lo_" + std::to_string(i));
    for (auto [j, s] : by_row[i]) row.term(s, sel(j));
    row.term(1.0 + mc, err(i));
    row.end(">=", 1.0);
  }
  row.begin("error_budget");
  for (std::size_t i = 0; i < p.n; ++i) row.term(1.0, err(i));
  for (std::size_t i = 0; i < p.n; ++i) row.term(1.0 - p.init_error - p.params.alpha, cov(i));
  row.end("<=", n);
  for (std::size_t i = 0; i < p.n; ++i) {
    row.begin("cover_up_" + std::to_string(i));
    for (auto [j, s] : by_row[i]) row.term(1.0, sel(j));
    row.term(-mc, cov(i));
    row.end("<=", 0.0);
    row.begin("cover_lo_" + std::to_string(i));
    for (auto [j, s] : by_row[i]) row.term(1.0, sel(j));
    row.term(-1.0, cov(i));
    row.end(">=", 0.0);
  }
  row.begin("min_cover");
  for (std::size_t i = 0; i < p.n; ++i) row.term(1.0, cov(i));
  row.end(">=", n * (1.0 - p.params.beta));
  for (std::size_t i = 0; i < p.n; ++i) {
    row.begin("overlap_up_" + std::to_string(i));
    for (auto [j, s] : by_row[i]) row.term(1.0, sel(j));
    row.term(1.0 - mc, ovl(i));
    row.end("<=", 1.0);
    row.begin("overlap_lo_" + std::to_string(i));
    for (auto [j, s] : by_row[i]) row.term(1.0, sel(j));
    row.term(-2.0, ovl(i));
    row.end(">=", 0.0);
  }
  row.begin("max_overlap");
  for (std::size_t i = 0; i < p.n; ++i) row.term(1.0, ovl(i));
  for (std::size_t i = 0; i < p.n; ++i) row.term(-p.params.maxoverlap, cov(i));
  row.end("<=", 0.0);

  out << "Binaries\n";
  for (std::size_t j = 0; j < p.m; ++j) out << ' ' << sel(j) << '\n';
  for (std::size_t i = 0; i < p.n; ++i) out << ' ' << cov(i) << ' ' << err(i) << ' ' << ovl(i) << '\n';
  out << "End\n";
}

void export_lp(const SelectionProblem& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_lp(p, out);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace forestore
