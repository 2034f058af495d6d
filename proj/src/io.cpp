#include "blowup/io.hpp"

#include <boost/crc.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>

#include "blowup/errors.hpp"

namespace blowup {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), cols_(header.size()), path_(path) {
    if (!out_) throw ValidationError("cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != cols_) throw ValidationError(path_ + ": row width does not match header");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt17(values[i]);
    out_ << '\n';
    ++rows_;
}

void CsvWriter::row(const std::string& label, const std::vector<double>& values) {
    if (values.size() + 1 != cols_) throw ValidationError(path_ + ": row width does not match header");
    out_ << label;
    for (double v : values) out_ << ',' << fmt17(v);
    out_ << '\n';
    ++rows_;
}

void write_svg(const std::string& path, const std::string& title, const std::vector<Series>& series, bool log_x,
               bool log_y) {
    const double W = 640, H = 400, L = 60, Rm = 20, T = 40, Bm = 40;
    auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
    auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
    auto ok = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0) && (!log_y || y > 0);
    };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!ok(s.x[i], s.y[i])) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x1 > x0)) x1 = x0 + 1, x0 -= 1;
    if (!(y1 > y0)) y1 = y0 + 1, y0 -= 1;
    if (!std::isfinite(x0)) x0 = 0, x1 = 1;
    if (!std::isfinite(y0)) y0 = 0, y1 = 1;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    char buf[128];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - Rm << "\" height=\"" << H - T - Bm
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << L << "\" y=\"24\" font-family=\"monospace\" font-size=\"14\">" << title << "</text>\n";
    std::snprintf(buf, sizeof buf, "%s%.4g .. %.4g", log_x ? "log10 x: " : "x: ", x0, x1);
    out << "<text x=\"" << L << "\" y=\"" << H - 12 << "\" font-family=\"monospace\" font-size=\"11\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "%s%.4g .. %.4g", log_y ? "log10 y: " : "y: ", y0, y1);
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" font-family=\"monospace\" font-size=\"11\">" << buf
        << "</text>\n";
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    int c = 0;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[c % 5] << "\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!ok(s.x[i], s.y[i])) continue;
            double px = L + (tx(s.x[i]) - x0) / (x1 - x0) * (W - L - Rm);
            double py = H - Bm - (ty(s.y[i]) - y0) / (y1 - y0) * (H - T - Bm);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
            out << buf;
        }
        out << "\"/>\n";
        out << "<text x=\"" << W - Rm - 150 << "\" y=\"" << T + 16 + 14 * c << "\" fill=\"" << colors[c % 5]
            << "\" font-family=\"monospace\" font-size=\"11\">" << s.label << "</text>\n";
        ++c;
    }
    out << "</svg>\n";
}

std::uint32_t crc32_string(const std::string& s) {
    boost::crc_32_type crc;
    crc.process_bytes(s.data(), s.size());
    return crc.checksum();
}

std::uint32_t crc32_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return crc32_string(data);
}

}  // namespace blowup
