#include "qiopa/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "qiopa/errors.hpp"
#include "qiopa/fock.hpp"

namespace qiopa {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double x = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ValidationError("not a number: '" + s + "'");
    return x;
}

nlohmann::json provenance(const std::string& command, const nlohmann::json& config) {
    return {{"library", "qiopa"}, {"version", library_version()}, {"command", command}, {"config", config}};
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw ValidationError("CSV table needs at least one column");
}

void CsvTable::add_row(std::vector<Cell> cells) {
    if (cells.size() != columns_.size())
        throw LayoutMismatchError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(columns_.size()));
    std::vector<std::string> r;
    r.reserve(cells.size());
    for (auto& c : cells) r.push_back(std::move(c.text));
    rows_.push_back(std::move(r));
}

namespace {

void put_field(std::ostream& os, const std::string& f) {
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
        os << f;
        return;
    }
    os << '"';
    for (char c : f) {
        if (c == '"') os << '"';
        os << c;
    }
    os << '"';
}

void put_row(std::ostream& os, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) os << ',';
        put_field(os, r[i]);
    }
    os << '\n';
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ValidationError("unterminated quote in CSV row");
    out.push_back(std::move(cur));
    return out;
}

constexpr const char* kProvenanceTag = "# provenance: ";
constexpr const char* kMetadataTag = "# metadata: ";

bool starts_with(const std::string& s, const char* p) { return s.rfind(p, 0) == 0; }

}  // namespace

void CsvTable::write(std::ostream& os, const nlohmann::json& prov, const nlohmann::json& metadata) const {
    os << kProvenanceTag << prov.dump() << '\n';
    if (!metadata.is_null()) os << kMetadataTag << metadata.dump() << '\n';
    put_row(os, columns_);
    for (const auto& r : rows_) put_row(os, r);
}

std::size_t CsvDocument::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ValidationError("CSV has no column '" + name + "'");
}

double CsvDocument::number(std::size_t row, const std::string& name) const {
    if (row >= rows.size()) throw OutOfRangeError("CSV row index out of range");
    return parse_double(rows[row][column(name)]);
}

CsvDocument read_csv(std::istream& is) {
    CsvDocument d;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header && starts_with(line, "#")) {
            if (starts_with(line, kProvenanceTag))
                d.provenance = nlohmann::json::parse(line.substr(std::char_traits<char>::length(kProvenanceTag)));
            else if (starts_with(line, kMetadataTag))
                d.metadata = nlohmann::json::parse(line.substr(std::char_traits<char>::length(kMetadataTag)));
            continue;
        }
        if (!header) {
            d.columns = split_row(line);
            header = true;
            continue;
        }
        if (line.empty()) continue;
        auto r = split_row(line);
        if (r.size() != d.columns.size())
            throw LayoutMismatchError("CSV row " + std::to_string(d.rows.size() + 1) + " has " +
                                      std::to_string(r.size()) + " fields, header has " +
                                      std::to_string(d.columns.size()));
        d.rows.push_back(std::move(r));
    }
    if (!header) throw ValidationError("CSV has no header row");
    if (d.provenance.is_null()) throw ValidationError("CSV has no provenance line");
    return d;
}

void write_json(std::ostream& os, const nlohmann::json& prov, const nlohmann::json& payload) {
    if (!payload.is_object()) throw ValidationError("JSON payload must be an object");
    if (payload.contains("provenance")) throw ValidationError("payload may not define 'provenance'");
    nlohmann::json doc = payload;
    doc["provenance"] = prov;
    os << doc.dump(2) << '\n';
}

nlohmann::json read_json(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("provenance")) throw ValidationError("JSON document lacks provenance");
    return j;
}

nlohmann::json matrix_json(const Eigen::MatrixXcd& m) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json r = nlohmann::json::array(), c = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            r.push_back(m(i, j).real());
            c.push_back(m(i, j).imag());
        }
        re.push_back(r);
        im.push_back(c);
    }
    return {{"re", re}, {"im", im}};
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (re.size() != im.size()) throw LayoutMismatchError("re/im row counts differ");
    const Eigen::Index n = Eigen::Index(re.size());
    const Eigen::Index m = n ? Eigen::Index(re[0].size()) : 0;
    Eigen::MatrixXcd out(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (Eigen::Index(re[i].size()) != m || Eigen::Index(im[i].size()) != m)
            throw LayoutMismatchError("ragged matrix");
        for (Eigen::Index k = 0; k < m; ++k) out(i, k) = {re[i][k].get<double>(), im[i][k].get<double>()};
    }
    return out;
}

}  // namespace qiopa
