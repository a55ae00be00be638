#pragma once

#include "neural_atoms/tensor.hpp"

#include <filesystem>
#include <string>

namespace na {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Writes a matrix with a header row "corner,0,1,..." and the row index as first column.
void write_matrix_csv(const std::filesystem::path& path, const Tensor& m, const std::string& corner);

/// Parses a file written by write_matrix_csv.
Tensor read_matrix_csv(const std::filesystem::path& path);

}  // namespace na
