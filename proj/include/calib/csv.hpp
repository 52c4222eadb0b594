#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace calib {

// Shortest round-trippable decimal form (17 significant digits).
std::string format_double(double v);

// Row-oriented CSV assembly with a fixed header; cell counts are checked
// against the header on every row.
class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> header);

    void begin_row();
    void add(const std::string& value);
    void add(const char* value);
    void add(double value);
    void add(std::size_t value);
    void end_row();

    std::size_t n_rows() const { return rows_; }
    std::string str(bool with_header = true) const;

private:
    void add_cell(std::string_view value);

    std::vector<std::string> header_;
    std::string body_;
    std::size_t cells_in_row_ = 0;
    std::size_t rows_ = 0;
    bool in_row_ = false;
};

// Writes via a temporary file in the same directory followed by a rename, so
// readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace calib
