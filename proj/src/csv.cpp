#include "calib/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace calib {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvBuilder::CsvBuilder(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CsvBuilder: empty header");
    for (const std::string& h : header_)
        if (h.find_first_of(",\n\"") != std::string::npos)
            throw std::invalid_argument("CsvBuilder: header cell needs quoting, unsupported");
}

void CsvBuilder::begin_row() {
    if (in_row_) throw std::logic_error("CsvBuilder: row already open");
    in_row_ = true;
    cells_in_row_ = 0;
}

void CsvBuilder::add_cell(std::string_view value) {
    if (!in_row_) throw std::logic_error("CsvBuilder: no open row");
    if (value.find_first_of(",\n\"") != std::string_view::npos)
        throw std::invalid_argument("CsvBuilder: cell needs quoting, unsupported");
    if (cells_in_row_ > 0) body_ += ',';
    body_ += value;
    ++cells_in_row_;
}

void CsvBuilder::add(const std::string& value) { add_cell(value); }
void CsvBuilder::add(const char* value) { add_cell(value); }
void CsvBuilder::add(double value) { add_cell(format_double(value)); }
void CsvBuilder::add(std::size_t value) { add_cell(std::to_string(value)); }

void CsvBuilder::end_row() {
    if (!in_row_) throw std::logic_error("CsvBuilder: no open row");
    if (cells_in_row_ != header_.size())
        throw std::logic_error("CsvBuilder: cell count does not match header");
    body_ += '\n';
    in_row_ = false;
    ++rows_;
}

std::string CsvBuilder::str(bool with_header) const {
    if (in_row_) throw std::logic_error("CsvBuilder: unfinished row");
    if (!with_header) return body_;
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i > 0) out += ',';
        out += header_[i];
    }
    out += '\n';
    out += body_;
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("write_file_atomic: cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write_file_atomic: write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("write_file_atomic: rename failed for " + path.string());
    }
}

} // namespace calib
