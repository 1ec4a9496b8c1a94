#include "huberlr/archive.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace huberlr {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

constexpr std::array<char, 4> kComplexMagic{'C', 'M', 'P', 'X'};
constexpr std::array<char, 4> kMaskMagic{'M', 'A', 'S', 'K'};

struct Header {
  std::array<char, 4> magic{};
  std::uint32_t rows = 0, cols = 0, depth = 0;
};

void write_header(std::ofstream& out, const std::array<char, 4>& magic, std::uint32_t rows,
                  std::uint32_t cols, std::uint32_t depth) {
  out.write(magic.data(), 4);
  for (std::uint32_t v : {rows, cols, depth}) out.write(reinterpret_cast<const char*>(&v), 4);
}

Header read_header(std::ifstream& in, const fs::path& path, const std::array<char, 4>& expected) {
  Header h;
  in.read(h.magic.data(), 4);
  for (std::uint32_t* v : {&h.rows, &h.cols, &h.depth}) in.read(reinterpret_cast<char*>(v), 4);
  if (!in) throw Error(ErrorCode::Io, path.string() + ": truncated header");
  if (h.magic != expected) {
    throw Error(ErrorCode::Io, path.string() + ": bad magic, expected " +
                                   std::string(expected.data(), 4));
  }
  return h;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return in;
}

std::uint32_t checked_u32(Eigen::Index v) {
  if (v < 0 || v > static_cast<Eigen::Index>(UINT32_MAX)) {
    throw Error(ErrorCode::Io, "array dimension does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(v);
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw Error(ErrorCode::Io, "meta is missing '" + key + "'");
  return it->second;
}

template <class T>
std::string text(T v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

void write_complex_array(const fs::path& path, const ComplexArray& a) {
  if (a.values.size() != std::size_t{a.rows} * a.cols * a.depth) {
    throw Error(ErrorCode::DimensionMismatch, "complex array payload size");
  }
  auto out = open_out(path);
  write_header(out, kComplexMagic, a.rows, a.cols, a.depth);
  out.write(reinterpret_cast<const char*>(a.values.data()),
            static_cast<std::streamsize>(a.values.size() * sizeof(Complex)));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

ComplexArray read_complex_array(const fs::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path, kComplexMagic);
  ComplexArray a{h.rows, h.cols, h.depth, std::vector<Complex>(std::size_t{h.rows} * h.cols * h.depth)};
  in.read(reinterpret_cast<char*>(a.values.data()),
          static_cast<std::streamsize>(a.values.size() * sizeof(Complex)));
  if (!in) throw Error(ErrorCode::Io, path.string() + ": truncated payload");
  return a;
}

void write_matrix(const fs::path& path, const CMatrix& m) {
  ComplexArray a{checked_u32(m.rows()), checked_u32(m.cols()), 1, {}};
  a.values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.values.push_back(m(r, c));
  }
  write_complex_array(path, a);
}

CMatrix read_matrix(const fs::path& path) {
  const ComplexArray a = read_complex_array(path);
  if (a.depth != 1) throw Error(ErrorCode::Io, path.string() + ": expected depth 1");
  CMatrix m(a.rows, a.cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = a.values[i++];
  }
  return m;
}

void write_mask(const fs::path& path, const MaskMatrix& m) {
  auto out = open_out(path);
  write_header(out, kMaskMagic, checked_u32(m.rows()), checked_u32(m.cols()), 1);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.put(static_cast<char>(m(r, c)));
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

MaskMatrix read_mask(const fs::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path, kMaskMagic);
  MaskMatrix m(h.rows, h.cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      char b = 0;
      in.get(b);
      m(r, c) = static_cast<std::uint8_t>(b);
    }
  }
  if (!in) throw Error(ErrorCode::Io, path.string() + ": truncated payload");
  return m;
}

void write_meta(const fs::path& path, const std::map<std::string, std::string>& kv) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

std::map<std::string, std::string> read_meta(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Io, "malformed meta line: " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void save_problem(const fs::path& dir, const ReconstructionProblem& p) {
  const MriOperator* op = p.mri();
  if (op == nullptr) throw Error(ErrorCode::InvalidArgument, "only MRI problems can be archived");
  p.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

  const SyntheticParams& sp = p.params;
  std::map<std::string, std::string> meta{
      {"image_x", text(op->image_x())},
      {"image_y", text(op->image_y())},
      {"frames", text(op->frames())},
      {"coils", text(op->coil_count())},
      {"rank", text(sp.rank)},
      {"seed", text(sp.seed)},
      {"sigma", text(sp.noise_sigma)},
      {"acceleration", text(sp.acceleration)},
      {"patch_x", text(p.geometry.patch_x())},
      {"patch_y", text(p.geometry.patch_y())},
      {"shifted", p.geometry.shifts().size() > 1 ? "true" : "false"},
      {"has_truth", p.truth ? "true" : "false"},
  };
  if (p.lambda) meta["lambda"] = text(*p.lambda);
  write_meta(dir / "meta", meta);

  if (p.truth) write_matrix(dir / "truth", *p.truth);
  write_matrix(dir / "coils", op->coils());
  write_mask(dir / "masks", op->masks());

  const Eigen::Index m = op->input_rows();
  ComplexArray k{checked_u32(m), checked_u32(op->frames()), checked_u32(op->coil_count()), {}};
  k.values.reserve(static_cast<std::size_t>(p.data.size()));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index n = 0; n < op->frames(); ++n) {
      for (Eigen::Index c = 0; c < op->coil_count(); ++c) k.values.push_back(p.data(c * m + i, n));
    }
  }
  write_complex_array(dir / "kspace", k);
}

ReconstructionProblem load_problem(const fs::path& dir) {
  const auto meta = read_meta(dir / "meta");
  try {
    SyntheticParams sp;
    sp.image_x = std::stoi(require(meta, "image_x"));
    sp.image_y = std::stoi(require(meta, "image_y"));
    sp.frames = std::stoi(require(meta, "frames"));
    sp.coils = std::stoi(require(meta, "coils"));
    sp.rank = std::stoi(require(meta, "rank"));
    sp.seed = std::stoull(require(meta, "seed"));
    sp.noise_sigma = std::stod(require(meta, "sigma"));
    sp.acceleration = std::stod(require(meta, "acceleration"));
    const int px = std::stoi(require(meta, "patch_x"));
    const int py = std::stoi(require(meta, "patch_y"));
    const bool shifted = require(meta, "shifted") == "true";
    PatchGeometry geom = shifted ? PatchGeometry(sp.image_x, sp.image_y, px, py)
                                 : PatchGeometry::unshifted(sp.image_x, sp.image_y, px, py);

    CMatrix coils = read_matrix(dir / "coils");
    MaskMatrix masks = read_mask(dir / "masks");
    auto op = std::make_shared<MriOperator>(sp.image_x, sp.image_y, std::move(coils), std::move(masks));

    const ComplexArray k = read_complex_array(dir / "kspace");
    const Eigen::Index m = op->input_rows();
    if (k.rows != m || k.cols != op->frames() || k.depth != op->coil_count()) {
      throw Error(ErrorCode::Io, "kspace dimensions do not match coils and masks");
    }
    CMatrix data(op->output_rows(), op->frames());
    std::size_t i = 0;
    for (Eigen::Index v = 0; v < m; ++v) {
      for (Eigen::Index n = 0; n < op->frames(); ++n) {
        for (Eigen::Index c = 0; c < op->coil_count(); ++c) data(c * m + v, n) = k.values[i++];
      }
    }
    std::optional<CMatrix> truth;
    if (require(meta, "has_truth") == "true") truth = read_matrix(dir / "truth");
    std::optional<double> lambda;
    if (const auto it = meta.find("lambda"); it != meta.end()) lambda = std::stod(it->second);

    ReconstructionProblem p{std::move(op), std::move(data), std::move(truth), std::move(geom), lambda, sp};
    p.validate();
    return p;
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::Io, "malformed meta value in " + (dir / "meta").string());
  } catch (const std::out_of_range& e) {
    throw Error(ErrorCode::Io, "meta value out of range in " + (dir / "meta").string());
  }
}

}  // namespace huberlr
