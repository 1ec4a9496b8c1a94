#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "huberlr/model.hpp"

namespace huberlr {

/// Array files: 16-byte header (4-byte magic, u32 rows, u32 cols, u32 depth,
/// little-endian) followed by the payload in row-major (row, col, depth)
/// order. Complex arrays use magic "CMPX" and (real, imag) f64 pairs; masks
/// use magic "MASK" and one byte per entry.
///
/// A complex array is rows x cols x depth; an M x N matrix is stored with
/// depth 1.
struct ComplexArray {
  std::uint32_t rows = 0, cols = 0, depth = 1;
  std::vector<Complex> values;  // row-major (row, col, depth)
};

void write_complex_array(const std::filesystem::path& path, const ComplexArray& a);
ComplexArray read_complex_array(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const CMatrix& m);
CMatrix read_matrix(const std::filesystem::path& path);

void write_mask(const std::filesystem::path& path, const MaskMatrix& m);
MaskMatrix read_mask(const std::filesystem::path& path);

/// `key = value` lines.
void write_meta(const std::filesystem::path& path, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_meta(const std::filesystem::path& path);

/// Problem directory: meta, truth (M x N), coils (M x C), masks (M x N),
/// kspace (M x N x C). Requires an MriOperator.
void save_problem(const std::filesystem::path& dir, const ReconstructionProblem& p);
ReconstructionProblem load_problem(const std::filesystem::path& dir);

}  // namespace huberlr
