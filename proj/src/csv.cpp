#include "neural_atoms/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace na {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_matrix_csv(const std::filesystem::path& path, const Tensor& m, const std::string& corner) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot write");
    out << corner;
    for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << j;
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << i;
        for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << format_double(m.at(i, j));
        out << '\n';
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Tensor read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    std::string line;
    std::getline(in, line);
    std::vector<double> data;
    std::size_t rows = 0, cols = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // row index
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            std::from_chars(cell.data(), cell.data() + cell.size(), v);
            data.push_back(v);
            ++c;
        }
        if (rows == 0) cols = c;
        if (c != cols) throw std::runtime_error(path.string() + ": ragged CSV");
        ++rows;
    }
    return Tensor({rows, cols}, std::move(data));
}

}  // namespace na
