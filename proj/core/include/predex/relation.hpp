#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace predex {

struct Predicate;

enum class ColumnKind { numeric, categorical };

// Missing cells are NaN in numeric columns and "" in categorical ones.
inline bool missing_numeric(double v) { return std::isnan(v); }
inline bool missing_categorical(const std::string& v) { return v.empty(); }

// Exactly one of `nums` / `cats` is populated, matching `kind`.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
  std::vector<double> nums;
  std::vector<std::string> cats;

  std::size_t size() const { return kind == ColumnKind::numeric ? nums.size() : cats.size(); }
  bool missing(std::size_t row) const {
    return kind == ColumnKind::numeric ? missing_numeric(nums[row]) : missing_categorical(cats[row]);
  }
};

// Immutable column-major table. All columns share the same length and have
// unique names.
class Relation {
 public:
  Relation() = default;
  explicit Relation(std::vector<Column> columns);

  std::size_t row_count() const { return rows_; }
  std::size_t column_count() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }

  const Column* find_column(const std::string& name) const;
  const Column& column(const std::string& name) const;  // throws std::invalid_argument
  std::size_t column_index(const std::string& name) const;

 private:
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

// Column-type hints for CSV loading. `date` parses YYYY-MM-DD or MM/DD/YYYY
// into days since 1970-01-01 and yields a numeric column.
enum class CsvType { numeric, categorical, date };

// RFC 4180 CSV with a header row. Untyped columns are numeric when every
// non-empty cell parses as a number, categorical otherwise. Empty cells are
// missing. Throws std::runtime_error on unreadable files, ragged rows,
// duplicate or unknown hinted columns, and hint/cell conflicts.
Relation load_csv(const std::filesystem::path& path,
                  const std::map<std::string, CsvType>& hints = {});
Relation load_csv(std::istream& in, const std::map<std::string, CsvType>& hints = {});

void write_csv(const Relation& r, const std::filesystem::path& path);
void write_csv(const Relation& r, std::ostream& out);

// Sorted distinct non-missing values of a categorical column.
std::vector<std::string> unique_values(const Relation& r, const std::string& column);

// [min, max] over the non-missing cells of a numeric column. Throws when the
// column is not numeric or holds no finite value.
std::pair<double, double> column_range(const Relation& r, const std::string& column);

// Rows satisfying p (1) and not (0). A clause on a missing cell is
// unsatisfied, so rows with missing cells are never selected for removal.
std::vector<char> satisfies_mask(const Relation& r, const Predicate& p);

std::size_t count_satisfying(const Relation& r, const Predicate& p);

// The complement selection: rows NOT satisfying p, original order kept.
Relation filter_not(const Relation& r, const Predicate& p);

}  // namespace predex
