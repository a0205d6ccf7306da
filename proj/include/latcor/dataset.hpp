#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace latcor {

enum class ColumnKind { ordinal, continuous, ignore };

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    std::vector<double> values;  // undefined where missing
    std::vector<char> missing;   // 1 = missing (empty cell or NA)
};

struct Dataset {
    std::vector<Column> columns;
    std::size_t rows = 0;

    const Column* find(std::string_view name) const;
};

/// Reads a headered CSV.  Empty cells and the NA token are missing;
/// every other cell must parse as a number.  Columns whose observed
/// values are all integers are classified ordinal, the rest continuous;
/// callers may override kinds afterwards.
Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);

}  // namespace latcor
