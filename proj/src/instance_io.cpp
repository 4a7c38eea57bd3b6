#include <cstdio>
#include <cstring>
#include <memory>

#include "risro/bench.hpp"

namespace risro::bench {

namespace {

constexpr char kMagic[4] = {'R', 'I', 'S', 'R'};
constexpr std::uint16_t kVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_bytes(std::FILE* f, const void* src, std::size_t len) {
  if (std::fwrite(src, 1, len, f) != len) throw IoError("short write");
}

void put_u16(std::FILE* f, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  put_bytes(f, b, 2);
}

void put_u64(std::FILE* f, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  put_bytes(f, b, 8);
}

void put_f64(std::FILE* f, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(f, bits);
}

void get_bytes(std::FILE* f, void* dst, std::size_t len, const char* field) {
  if (std::fread(dst, 1, len, f) != len)
    throw DataError(std::string("truncated file while reading ") + field);
}

std::uint16_t get_u16(std::FILE* f, const char* field) {
  unsigned char b[2];
  get_bytes(f, b, 2, field);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint64_t get_u64(std::FILE* f, const char* field) {
  unsigned char b[8];
  get_bytes(f, b, 8, field);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::FILE* f, const char* field) {
  const std::uint64_t bits = get_u64(f, field);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

// All dense payloads go out row by row.
void put_matrix(std::FILE* f, const Matrix& M) {
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) put_f64(f, M(i, j));
}

Matrix get_matrix(std::FILE* f, Index rows, Index cols, const char* field) {
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = get_f64(f, field);
  return M;
}

}  // namespace

void dump_instance(const ProblemInstance& prob, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open for writing: " + path);
  put_bytes(f.get(), kMagic, 4);
  put_u16(f.get(), kVersion);
  unsigned char variant = 0;
  switch (prob.op.kind()) {
    case OperatorKind::DenseSensing: variant = 0; break;
    case OperatorKind::EntrySampling: variant = 1; break;
    case OperatorKind::SymmetricRankOne: variant = 2; break;
  }
  put_bytes(f.get(), &variant, 1);
  put_u64(f.get(), static_cast<std::uint64_t>(prob.op.p1()));
  put_u64(f.get(), static_cast<std::uint64_t>(prob.op.p2()));
  put_u64(f.get(), static_cast<std::uint64_t>(prob.op.n()));
  put_u64(f.get(), static_cast<std::uint64_t>(prob.rank));
  const unsigned char has_truth = prob.truth ? 1 : 0;
  put_bytes(f.get(), &has_truth, 1);

  switch (prob.op.kind()) {
    case OperatorKind::DenseSensing:
      for (Index i = 0; i < prob.op.n(); ++i)
        for (Index e = 0; e < prob.op.stacked().cols(); ++e)
          put_f64(f.get(), prob.op.stacked()(i, e));
      break;
    case OperatorKind::EntrySampling:
      for (const auto& [i, j] : prob.op.omega()) {
        put_u64(f.get(), static_cast<std::uint64_t>(i));
        put_u64(f.get(), static_cast<std::uint64_t>(j));
      }
      break;
    case OperatorKind::SymmetricRankOne:
      put_matrix(f.get(), prob.op.vectors());
      break;
  }
  for (Index i = 0; i < prob.y.size(); ++i) put_f64(f.get(), prob.y(i));
  if (prob.truth) put_matrix(f.get(), *prob.truth);
  if (std::fflush(f.get()) != 0) throw IoError("flush failed: " + path);
}

ProblemInstance load_instance(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open for reading: " + path);
  char magic[4];
  get_bytes(f.get(), magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("bad magic bytes");
  const std::uint16_t version = get_u16(f.get(), "version");
  if (version != kVersion) throw DataError("unsupported version " + std::to_string(version));
  unsigned char variant;
  get_bytes(f.get(), &variant, 1, "variant");
  if (variant > 2) throw DataError("unknown operator variant tag");
  const auto p1 = static_cast<Index>(get_u64(f.get(), "p1"));
  const auto p2 = static_cast<Index>(get_u64(f.get(), "p2"));
  const auto n = static_cast<Index>(get_u64(f.get(), "n"));
  const auto rank = static_cast<Index>(get_u64(f.get(), "rank"));
  if (p1 <= 0 || p2 <= 0 || n <= 0 || rank <= 0 || rank > std::min(p1, p2))
    throw DataError("inconsistent dimensions in header");
  unsigned char has_truth;
  get_bytes(f.get(), &has_truth, 1, "has_truth");

  ProblemInstance prob;
  prob.rank = rank;
  switch (variant) {
    case 0: {
      RowMatrix stacked(n, p1 * p2);
      for (Index i = 0; i < n; ++i)
        for (Index e = 0; e < p1 * p2; ++e) stacked(i, e) = get_f64(f.get(), "measurements");
      prob.op = SensingOperator::dense_stacked(std::move(stacked), p1, p2);
      break;
    }
    case 1: {
      std::vector<std::pair<Index, Index>> omega(static_cast<std::size_t>(n));
      for (auto& [i, j] : omega) {
        i = static_cast<Index>(get_u64(f.get(), "omega"));
        j = static_cast<Index>(get_u64(f.get(), "omega"));
        if (i < 0 || i >= p1 || j < 0 || j >= p2) throw DataError("omega index out of bounds");
      }
      try {
        prob.op = SensingOperator::entry_sampling(p1, p2, std::move(omega));
      } catch (const std::invalid_argument& e) {
        throw DataError(std::string("omega: ") + e.what());
      }
      break;
    }
    case 2: {
      if (p1 != p2) throw DataError("rank-one variant requires square dims");
      Matrix a = get_matrix(f.get(), p1, n, "vectors");
      prob.op = SensingOperator::rank_one(std::move(a));
      break;
    }
  }
  prob.y.resize(n);
  for (Index i = 0; i < n; ++i) prob.y(i) = get_f64(f.get(), "y");
  if (has_truth) prob.truth = get_matrix(f.get(), p1, p2, "truth");
  // trailing bytes mean the header lied about a payload size
  unsigned char extra;
  if (std::fread(&extra, 1, 1, f.get()) == 1) throw DataError("trailing bytes after payload");
  return prob;
}

}  // namespace risro::bench
