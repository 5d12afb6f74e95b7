#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qiopa {

// Shortest round-trip decimal form, locale independent ("nan", "inf", "-inf"
// for non-finite values).
std::string format_double(double x);
double parse_double(const std::string& s);

// {"library": "qiopa", "version": ..., "command": ..., "config": ...}. No
// timestamps or host data, so equal configs give equal bytes.
nlohmann::json provenance(const std::string& command, const nlohmann::json& config);

// Provenance travels as one comment line ("# provenance: {...}") above the
// header row; extra comment lines carry free-form metadata the same way.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);
    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }

    struct Cell {
        Cell(double x) : text(format_double(x)) {}
        Cell(int x) : text(std::to_string(x)) {}
        Cell(long x) : text(std::to_string(x)) {}
        Cell(unsigned long x) : text(std::to_string(x)) {}
        Cell(std::string s) : text(std::move(s)) {}
        Cell(const char* s) : text(s) {}
        std::string text;
    };
    void add_row(std::vector<Cell> cells);

    void write(std::ostream& os, const nlohmann::json& provenance,
               const nlohmann::json& metadata = nullptr) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

struct CsvDocument {
    nlohmann::json provenance;
    nlohmann::json metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::size_t column(const std::string& name) const;  // throws ValidationError if absent
    double number(std::size_t row, const std::string& name) const;
};
// Strict reader for what CsvTable writes: every row must match the header.
CsvDocument read_csv(std::istream& is);

// {"provenance": ..., <payload keys>}; payload must be an object.
void write_json(std::ostream& os, const nlohmann::json& provenance, const nlohmann::json& payload);
nlohmann::json read_json(std::istream& is);

nlohmann::json matrix_json(const Eigen::MatrixXcd& m);  // {"re": [[...]], "im": [[...]]}
Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j);

}  // namespace qiopa
