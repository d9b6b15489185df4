#include "polaring/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace polaring {

CsvWriter::CsvWriter(std::vector<std::string> columns, int precision)
    : n_columns_(columns.size()), precision_(precision) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i > 0) buffer_ += ',';
        buffer_ += columns[i];
    }
    buffer_ += '\n';
}

std::string CsvWriter::format(double v, int precision) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

void CsvWriter::add_row(const std::vector<double>& values) {
    if (values.size() != n_columns_)
        throw std::invalid_argument("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) buffer_ += ',';
        buffer_ += format(values[i], precision_);
    }
    buffer_ += '\n';
}

void CsvWriter::add_raw_row(const std::string& row) {
    buffer_ += row;
    buffer_ += '\n';
}

void CsvWriter::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("CsvWriter: cannot open " + path.string());
    out << buffer_;
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("fnv1a_file: cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a_hash(bytes);
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace polaring
