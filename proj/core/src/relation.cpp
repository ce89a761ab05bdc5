#include "predex/relation.hpp"

#include <algorithm>
#include <charconv>
#include <iterator>
#include <limits>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "predex/predicate.hpp"

namespace predex {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// Full-token float parse. NaN counts as missing; infinities are rejected so
// range-based search domains stay finite.
bool parse_number(const std::string& cell, double& out, bool& is_missing) {
  std::size_t b = cell.find_first_not_of(" \t");
  if (b == std::string::npos) {
    is_missing = true;
    return true;
  }
  std::size_t e = cell.find_last_not_of(" \t") + 1;
  const char* first = cell.data() + b;
  const char* last = cell.data() + e;
  double v = 0.0;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) return false;
  if (std::isnan(v)) {
    is_missing = true;
    return true;
  }
  if (std::isinf(v)) return false;
  out = v;
  is_missing = false;
  return true;
}

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// days_from_civil).
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<long>(era) * 146097L + static_cast<long>(doe) - 719468L;
}

bool valid_ymd(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int dmax = days[m - 1];
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) dmax = 29;
  return d <= dmax;
}

// Accepts YYYY-MM-DD and MM/DD/YYYY.
bool parse_date(const std::string& cell, double& out, bool& is_missing) {
  std::size_t b = cell.find_first_not_of(" \t");
  if (b == std::string::npos) {
    is_missing = true;
    return true;
  }
  std::size_t e = cell.find_last_not_of(" \t") + 1;
  std::string s = cell.substr(b, e - b);
  int y = 0, m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) == 3 && valid_ymd(y, m, d)) {
    out = static_cast<double>(days_from_civil(y, m, d));
    is_missing = false;
    return true;
  }
  if (std::sscanf(s.c_str(), "%2d/%2d/%4d%c", &m, &d, &y, &tail) == 3 && valid_ymd(y, m, d)) {
    out = static_cast<double>(days_from_civil(y, m, d));
    is_missing = false;
    return true;
  }
  return false;
}

// RFC 4180 into rows of raw cells. Quoted fields may contain commas,
// doubled quotes, and line breaks; \r\n and \n both end records.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        row.push_back(std::move(cell));
        cell.clear();
        any = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;  // consumed by \n
        [[fallthrough]];
      case '\n':
        row.push_back(std::move(cell));
        cell.clear();
        rows.push_back(std::move(row));
        row.clear();
        any = false;
        break;
      default:
        cell += ch;
        any = true;
        break;
    }
  }
  if (quoted) fail("csv: unterminated quoted field");
  if (any || !cell.empty() || !row.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_cell(std::ostream& out, const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) {
    out << cell;
    return;
  }
  out << '"';
  for (char ch : cell) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Relation::Relation(std::vector<Column> columns) : columns_(std::move(columns)) {
  std::set<std::string> names;
  for (const Column& c : columns_) {
    if (c.name.empty()) throw std::invalid_argument("relation: empty column name");
    if (!names.insert(c.name).second)
      throw std::invalid_argument("relation: duplicate column \"" + c.name + "\"");
  }
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (const Column& c : columns_) {
    if (c.size() != rows_)
      throw std::invalid_argument("relation: column \"" + c.name + "\" has " +
                                  std::to_string(c.size()) + " rows, expected " +
                                  std::to_string(rows_));
    if (c.kind == ColumnKind::numeric ? !c.cats.empty() : !c.nums.empty())
      throw std::invalid_argument("relation: column \"" + c.name + "\" mixes storage kinds");
  }
}

const Column* Relation::find_column(const std::string& name) const {
  for (const Column& c : columns_)
    if (c.name == name) return &c;
  return nullptr;
}

const Column& Relation::column(const std::string& name) const {
  const Column* c = find_column(name);
  if (!c) throw std::invalid_argument("relation: no column \"" + name + "\"");
  return *c;
}

std::size_t Relation::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == name) return i;
  throw std::invalid_argument("relation: no column \"" + name + "\"");
}

Relation load_csv(std::istream& in, const std::map<std::string, CsvType>& hints) {
  auto rows = parse_csv(in);
  if (rows.empty()) fail("csv: no header row");
  const std::vector<std::string>& header = rows.front();
  for (const auto& [name, kind] : hints) {
    (void)kind;
    if (std::find(header.begin(), header.end(), name) == header.end())
      fail("csv: hint for unknown column \"" + name + "\"");
  }
  const std::size_t ncols = header.size();
  const std::size_t nrows = rows.size() - 1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != ncols)
      fail("csv: row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
           " cells, expected " + std::to_string(ncols));
  }

  std::vector<Column> columns(ncols);
  for (std::size_t c = 0; c < ncols; ++c) {
    Column& col = columns[c];
    col.name = header[c];
    auto hint = hints.find(col.name);
    CsvType type = CsvType::categorical;
    if (hint != hints.end()) {
      type = hint->second;
    } else {
      bool all_numeric = true;
      for (std::size_t i = 1; i <= nrows && all_numeric; ++i) {
        double v;
        bool miss;
        all_numeric = parse_number(rows[i][c], v, miss);
      }
      // A column with no non-missing cell stays categorical unless hinted.
      bool any_value = false;
      for (std::size_t i = 1; i <= nrows && !any_value; ++i) {
        bool miss;
        double v;
        any_value = parse_number(rows[i][c], v, miss) ? !miss : true;
      }
      type = (all_numeric && any_value) ? CsvType::numeric : CsvType::categorical;
    }
    if (type == CsvType::categorical) {
      col.kind = ColumnKind::categorical;
      col.cats.reserve(nrows);
      for (std::size_t i = 1; i <= nrows; ++i) col.cats.push_back(rows[i][c]);
    } else {
      col.kind = ColumnKind::numeric;
      col.nums.reserve(nrows);
      for (std::size_t i = 1; i <= nrows; ++i) {
        double v = 0.0;
        bool miss = false;
        bool ok = type == CsvType::date ? parse_date(rows[i][c], v, miss)
                                        : parse_number(rows[i][c], v, miss);
        if (!ok)
          fail("csv: cell \"" + rows[i][c] + "\" in column \"" + col.name + "\" (row " +
               std::to_string(i + 1) + ") does not match the " +
               (type == CsvType::date ? std::string("date") : std::string("numeric")) + " hint");
        col.nums.push_back(miss ? std::numeric_limits<double>::quiet_NaN() : v);
      }
    }
  }
  return Relation(std::move(columns));
}

Relation load_csv(const std::filesystem::path& path, const std::map<std::string, CsvType>& hints) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("csv: cannot open \"" + path.string() + "\"");
  return load_csv(in, hints);
}

void write_csv(const Relation& r, std::ostream& out) {
  const auto& cols = r.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out << ',';
    write_cell(out, cols[c].name);
  }
  out << '\n';
  for (std::size_t i = 0; i < r.row_count(); ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out << ',';
      if (cols[c].kind == ColumnKind::numeric) {
        if (!missing_numeric(cols[c].nums[i])) out << format_number(cols[c].nums[i]);
      } else {
        write_cell(out, cols[c].cats[i]);
      }
    }
    out << '\n';
  }
}

void write_csv(const Relation& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("csv: cannot open \"" + path.string() + "\" for writing");
  write_csv(r, out);
  out.flush();
  if (!out) fail("csv: write to \"" + path.string() + "\" failed");
}

std::vector<std::string> unique_values(const Relation& r, const std::string& column) {
  const Column& col = r.column(column);
  if (col.kind != ColumnKind::categorical)
    throw std::invalid_argument("unique_values: column \"" + column + "\" is not categorical");
  std::set<std::string> seen;
  for (const std::string& v : col.cats)
    if (!missing_categorical(v)) seen.insert(v);
  return std::vector<std::string>(seen.begin(), seen.end());
}

std::pair<double, double> column_range(const Relation& r, const std::string& column) {
  const Column& col = r.column(column);
  if (col.kind != ColumnKind::numeric)
    throw std::invalid_argument("column_range: column \"" + column + "\" is not numeric");
  bool any = false;
  double lo = 0.0, hi = 0.0;
  for (double v : col.nums) {
    if (missing_numeric(v)) continue;
    if (!any) {
      lo = hi = v;
      any = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!any)
    throw std::invalid_argument("column_range: column \"" + column + "\" has no finite values");
  return {lo, hi};
}

std::vector<char> satisfies_mask(const Relation& r, const Predicate& p) {
  validate_predicate(p, r);
  struct ResolvedClause {
    const Column* col;
    const NumericRange* num;
    const CategoricalEq* cat;
  };
  std::vector<ResolvedClause> resolved;
  resolved.reserve(p.clauses.size());
  for (const Clause& c : p.clauses) {
    ResolvedClause rc{&r.column(clause_column(c)), std::get_if<NumericRange>(&c),
                      std::get_if<CategoricalEq>(&c)};
    resolved.push_back(rc);
  }
  // Numeric clauses are evaluated branchless (the test is false for NaN, so
  // missing values drop out exactly as a short-circuiting check would).
  // String clauses keep the early-out to skip compares on dead rows.
  std::vector<char> mask(r.row_count(), 1);
  for (const ResolvedClause& rc : resolved) {
    if (rc.num) {
      const double* vals = rc.col->nums.data();
      const double lo = rc.num->lo, hi = rc.num->hi;
      for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = static_cast<char>(mask[i] & ((vals[i] >= lo) & (vals[i] <= hi)));
      }
    } else {
      const std::vector<std::string>& vals = rc.col->cats;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        if (mask[i] && vals[i] != rc.cat->value) mask[i] = 0;
      }
    }
  }
  return mask;
}

std::size_t count_satisfying(const Relation& r, const Predicate& p) {
  auto mask = satisfies_mask(r, p);
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char(1)));
}

Relation filter_not(const Relation& r, const Predicate& p) {
  auto mask = satisfies_mask(r, p);
  std::size_t kept = r.row_count() - static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char(1)));
  std::vector<Column> out;
  out.reserve(r.column_count());
  for (const Column& col : r.columns()) {
    Column nc;
    nc.name = col.name;
    nc.kind = col.kind;
    if (col.kind == ColumnKind::numeric) {
      nc.nums.reserve(kept);
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (!mask[i]) nc.nums.push_back(col.nums[i]);
    } else {
      nc.cats.reserve(kept);
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (!mask[i]) nc.cats.push_back(col.cats[i]);
    }
    out.push_back(std::move(nc));
  }
  return Relation(std::move(out));
}

}  // namespace predex
