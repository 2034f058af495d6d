#pragma once
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace blowup {

// 17 significant digits, exponent form, so rows are byte-stable
std::string fmt17(double x);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    // first column is a label
    void row(const std::string& label, const std::vector<double>& values);
    std::size_t rows() const { return rows_; }

private:
    std::ofstream out_;
    std::size_t cols_ = 0, rows_ = 0;
    std::string path_;
};

struct Series {
    std::string label;
    std::vector<double> x, y;
};

// One polyline per series in a framed box; log axes take log10 of positive values only.
void write_svg(const std::string& path, const std::string& title, const std::vector<Series>& series,
               bool log_x = false, bool log_y = false);

std::uint32_t crc32_file(const std::string& path);
std::uint32_t crc32_string(const std::string& s);

}  // namespace blowup
