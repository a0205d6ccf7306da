#include "latcor/dataset.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace latcor {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

bool is_missing(std::string_view field) {
    return field.empty() || field == "NA" || field == "na" || field == "NaN";
}

}  // namespace

const Column* Dataset::find(std::string_view name) const {
    for (const Column& c : columns)
        if (c.name == name) return &c;
    return nullptr;
}

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");

    Dataset ds;
    for (std::string_view name : split_fields(line)) {
        if (name.empty()) throw std::runtime_error("csv: empty column name in header");
        Column c;
        c.name = std::string(name);
        ds.columns.push_back(std::move(c));
    }

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != ds.columns.size())
            throw std::runtime_error("csv: line " + std::to_string(lineno) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(ds.columns.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            Column& col = ds.columns[c];
            if (is_missing(fields[c])) {
                col.values.push_back(0.0);
                col.missing.push_back(1);
                continue;
            }
            double value = 0.0;
            const char* first = fields[c].data();
            const char* last = first + fields[c].size();
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc{} || ptr != last)
                throw std::runtime_error("csv: line " + std::to_string(lineno) + ", column '" +
                                         col.name + "': cannot parse '" +
                                         std::string(fields[c]) + "' as a number");
            col.values.push_back(value);
            col.missing.push_back(0);
        }
        ++ds.rows;
    }

    for (Column& col : ds.columns) {
        bool all_integers = true;
        bool any = false;
        for (std::size_t k = 0; k < col.values.size(); ++k) {
            if (col.missing[k]) continue;
            any = true;
            if (col.values[k] != std::floor(col.values[k]) || std::abs(col.values[k]) > 1e9) {
                all_integers = false;
                break;
            }
        }
        col.kind = any && all_integers ? ColumnKind::ordinal : ColumnKind::continuous;
    }
    return ds;
}

Dataset read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return read_csv(in);
}

}  // namespace latcor
