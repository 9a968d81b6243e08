#include "flagbundle/reporting.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace flagbundle {

void write_atomic(const std::string& path, const std::string& content) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, target);
}

std::string digest_hex(const std::string& content) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : content) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string grid_csv(const std::vector<PolarGrid::Point>& pts, const std::vector<double>& values,
                     const std::vector<bool>* valid) {
    std::ostringstream os;
    os << "radius,angle,value\n";
    for (std::size_t p = 0; p < pts.size(); ++p) {
        if (valid && !(*valid)[p]) continue;
        os << format_double(pts[p].r) << ',' << format_double(pts[p].theta) << ','
           << format_double(values[p]) << '\n';
    }
    return os.str();
}

std::string keyed_grid_csv(const std::vector<PolarGrid::Point>& pts,
                           const std::vector<std::vector<double>>& values_per_key,
                           const std::string& key_name, const std::vector<bool>* valid) {
    std::ostringstream os;
    os << key_name << ",radius,angle,value\n";
    for (std::size_t k = 0; k < values_per_key.size(); ++k)
        for (std::size_t p = 0; p < pts.size(); ++p) {
            if (valid && !(*valid)[p]) continue;
            os << k << ',' << format_double(pts[p].r) << ',' << format_double(pts[p].theta) << ','
               << format_double(values_per_key[k][p]) << '\n';
        }
    return os.str();
}

std::string matrix_csv(const Mat& m) {
    std::ostringstream os;
    os << "row,col,re,im\n";
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) {
            const Complex v = m(r, c);
            if (v == Complex(0)) continue;
            os << r << ',' << c << ',' << format_double(v.real()) << ','
               << format_double(v.imag()) << '\n';
        }
    return os.str();
}

}  // namespace flagbundle
