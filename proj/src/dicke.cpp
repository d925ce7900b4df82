#include "pixyz/dicke.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <ostream>

#include "pixyz/errors.hpp"

namespace pixyz {

std::string to_string(u128 value) {
  if (value == 0) return "0";
  std::string s;
  while (value > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

namespace {

u128 binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  u128 c = 1;
  for (int i = 1; i <= k; ++i) c = c * static_cast<u128>(n - i + 1) / static_cast<u128>(i);
  return c;
}

void require_same_layout(const DickeBlockMatrix& a, const DickeBlockMatrix& b, const char* where) {
  if (a.layout_ptr() != b.layout_ptr() && !(a.layout() == b.layout())) {
    throw DomainError(std::string(where) + ": layout mismatch");
  }
}

Eigen::MatrixXcd hermitian_part(const Eigen::Map<const RowMatrixXcd>& a) {
  return 0.5 * (Eigen::MatrixXcd(a) + Eigen::MatrixXcd(a.adjoint()));
}

// ⟨m+1|J+|m⟩ with twom = 2m
double ladder_up(int twoj, int twom) {
  const double j = 0.5 * twoj;
  const double m = 0.5 * twom;
  return std::sqrt(std::max(0.0, j * (j + 1.0) - m * (m + 1.0)));
}

}  // namespace

u128 dicke_degeneracy(int N, int twoj) {
  if (twoj < 0 || twoj > N || (N - twoj) % 2 != 0) return 0;
  const int k = (N - twoj) / 2;
  return binomial(N, k) - binomial(N, k - 1);
}

int BlockLayout::find(int twoj) const noexcept {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].twoj == twoj) return static_cast<int>(b);
  }
  return -1;
}

BlockLayout build_layout(int N) {
  if (N < 1) throw DomainError("build_layout: N >= 1 required");
  if (N > kMaxDickeN) throw ResourceLimitError("build_layout: N > " + std::to_string(kMaxDickeN) + " unsupported");
  BlockLayout layout;
  layout.N = N;
  std::size_t offset = 0;
  for (int twoj = N; twoj >= 0; twoj -= 2) {
    DickeBlock b;
    b.twoj = twoj;
    b.dim = twoj + 1;
    b.offset = offset;
    b.degeneracy_exact = dicke_degeneracy(N, twoj);
    b.degeneracy = static_cast<double>(b.degeneracy_exact);
    offset += static_cast<std::size_t>(b.dim) * b.dim;
    layout.blocks.push_back(b);
  }
  layout.packed_size = offset;
  return layout;
}

std::shared_ptr<const BlockLayout> shared_layout(int N) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const BlockLayout>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[N];
  if (!slot) slot = std::make_shared<const BlockLayout>(build_layout(N));
  return slot;
}

DickeBlockMatrix::DickeBlockMatrix(std::shared_ptr<const BlockLayout> layout)
    : layout_(std::move(layout)), data_(layout_->packed_size, cplx(0.0, 0.0)) {}

Eigen::Map<RowMatrixXcd> DickeBlockMatrix::block(std::size_t b) {
  const auto& blk = layout_->blocks.at(b);
  return {data_.data() + blk.offset, blk.dim, blk.dim};
}

Eigen::Map<const RowMatrixXcd> DickeBlockMatrix::block(std::size_t b) const {
  const auto& blk = layout_->blocks.at(b);
  return {data_.data() + blk.offset, blk.dim, blk.dim};
}

cplx DickeBlockMatrix::trace() const {
  cplx t = 0.0;
  for (std::size_t b = 0; b < num_blocks(); ++b) t += block(b).trace();
  return t;
}

DickeBlockMatrix DickeBlockMatrix::adjoint() const {
  DickeBlockMatrix out(layout_);
  for (std::size_t b = 0; b < num_blocks(); ++b) out.block(b) = block(b).adjoint();
  return out;
}

double DickeBlockMatrix::hermiticity_error() const {
  double err = 0.0;
  for (std::size_t b = 0; b < num_blocks(); ++b) {
    const auto m = block(b);
    if (m.size() > 0) err = std::max(err, (RowMatrixXcd(m) - RowMatrixXcd(m.adjoint())).cwiseAbs().maxCoeff());
  }
  return err;
}

DickeBlockMatrix& DickeBlockMatrix::operator+=(const DickeBlockMatrix& other) {
  require_same_layout(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DickeBlockMatrix& DickeBlockMatrix::operator-=(const DickeBlockMatrix& other) {
  require_same_layout(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DickeBlockMatrix& DickeBlockMatrix::operator*=(cplx s) {
  for (auto& v : data_) v *= s;
  return *this;
}

DickeBlockMatrix operator+(DickeBlockMatrix a, const DickeBlockMatrix& b) { return a += b; }
DickeBlockMatrix operator-(DickeBlockMatrix a, const DickeBlockMatrix& b) { return a -= b; }
DickeBlockMatrix operator*(cplx s, DickeBlockMatrix a) { return a *= s; }

DickeBlockMatrix operator*(const DickeBlockMatrix& a, const DickeBlockMatrix& b) {
  require_same_layout(a, b, "block product");
  DickeBlockMatrix out(a.layout_ptr());
  for (std::size_t k = 0; k < a.num_blocks(); ++k) out.block(k).noalias() = a.block(k) * b.block(k);
  return out;
}

DickeBlockMatrix commutator(const DickeBlockMatrix& a, const DickeBlockMatrix& b) { return a * b - b * a; }

double max_abs_diff(const DickeBlockMatrix& a, const DickeBlockMatrix& b) {
  require_same_layout(a, b, "max_abs_diff");
  double d = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

DickeBlockMatrix collective_operator(std::shared_ptr<const BlockLayout> layout, Collective which) {
  DickeBlockMatrix out(std::move(layout));
  const cplx I(0.0, 1.0);
  for (std::size_t b = 0; b < out.num_blocks(); ++b) {
    const int twoj = out.layout().blocks[b].twoj;
    auto blk = out.block(b);
    for (int k = 0; k <= twoj; ++k) {
      const int twom = twoj - 2 * k;
      // row k-1 holds m+1: ⟨m+1|S+|m⟩ sits at (k-1, k)
      const double up = k > 0 ? ladder_up(twoj, twom) : 0.0;
      switch (which) {
        case Collective::Sz: blk(k, k) = static_cast<double>(twom); break;
        case Collective::Splus: if (k > 0) blk(k - 1, k) = up; break;
        case Collective::Sminus: if (k > 0) blk(k, k - 1) = up; break;
        case Collective::Sx:
          if (k > 0) {
            blk(k - 1, k) = up;
            blk(k, k - 1) = up;
          }
          break;
        case Collective::Sy:
          if (k > 0) {
            blk(k - 1, k) = -I * up;
            blk(k, k - 1) = I * up;
          }
          break;
      }
    }
  }
  return out;
}

DickeBlockMatrix identity_operator(std::shared_ptr<const BlockLayout> layout) {
  DickeBlockMatrix out(std::move(layout));
  for (std::size_t b = 0; b < out.num_blocks(); ++b) out.block(b).setIdentity();
  return out;
}

DickeBlockMatrix maximally_mixed(std::shared_ptr<const BlockLayout> layout) {
  DickeBlockMatrix out(std::move(layout));
  const double total = std::ldexp(1.0, out.layout().N);
  for (std::size_t b = 0; b < out.num_blocks(); ++b) {
    out.block(b).setIdentity();
    out.block(b) *= out.layout().blocks[b].degeneracy / total;
  }
  return out;
}

DickeBlockMatrix dicke_state(std::shared_ptr<const BlockLayout> layout, int twom) {
  DickeBlockMatrix out(std::move(layout));
  const int N = out.layout().N;
  if (std::abs(twom) > N || (N - twom) % 2 != 0) throw DomainError("dicke_state: invalid m");
  const int k = (N - twom) / 2;
  out.block(0)(k, k) = 1.0;
  return out;
}

cplx expectation(const DickeBlockMatrix& rho, const DickeBlockMatrix& op) {
  require_same_layout(rho, op, "expectation");
  cplx acc = 0.0;
  for (std::size_t b = 0; b < rho.num_blocks(); ++b) {
    acc += (rho.block(b).array() * op.block(b).transpose().array()).sum();
  }
  return acc;
}

namespace {

template <class PerEigen>
void for_each_eigenvalue(const DickeBlockMatrix& rho, PerEigen&& visit) {
  for (std::size_t b = 0; b < rho.num_blocks(); ++b) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(rho.block(b)), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverError("Hermitian eigensolver failed");
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      double l = es.eigenvalues()[i];
      if (l < -1e-9) throw DomainError("density matrix is not positive semidefinite (eigenvalue " + std::to_string(l) + ")");
      visit(std::max(l, 0.0), rho.layout().blocks[b].degeneracy);
    }
  }
}

}  // namespace

double weighted_functional(const DickeBlockMatrix& rho, const std::function<double(double)>& f) {
  double acc = 0.0;
  for_each_eigenvalue(rho, [&](double l, double d) { acc += d * f(l / d); });
  return acc;
}

double von_neumann_entropy(const DickeBlockMatrix& rho) {
  double acc = 0.0;
  for_each_eigenvalue(rho, [&](double l, double d) {
    if (l > 0.0) acc += -l * std::log(l) + l * std::log(d);
  });
  return acc;
}

double purity(const DickeBlockMatrix& rho) {
  double acc = 0.0;
  for (std::size_t b = 0; b < rho.num_blocks(); ++b) {
    acc += rho.block(b).cwiseAbs2().sum() / rho.layout().blocks[b].degeneracy;
  }
  return acc;
}

double min_eigenvalue(const DickeBlockMatrix& rho) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < rho.num_blocks(); ++b) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(rho.block(b)), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

// ---------------------------------------------------------------------------
// Product-basis bridge

namespace {

Eigen::VectorXcd apply_lowering(const Eigen::VectorXcd& v, int N) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (Eigen::Index a = 0; a < v.size(); ++a) {
    if (v[a] == cplx(0.0)) continue;
    for (int i = 0; i < N; ++i) {
      if (a & (Eigen::Index{1} << i)) out[a ^ (Eigen::Index{1} << i)] += v[a];
    }
  }
  return out;
}

}  // namespace

std::vector<std::vector<Eigen::MatrixXcd>> irrep_bases(int N) {
  if (N < 1 || N > 12) throw ResourceLimitError("irrep_bases: 1 <= N <= 12 required");
  const auto layout = build_layout(N);
  const Eigen::Index dim = Eigen::Index{1} << N;

  std::vector<std::vector<Eigen::Index>> by_pop(N + 1);
  for (Eigen::Index a = 0; a < dim; ++a) by_pop[std::popcount(static_cast<std::uint64_t>(a))].push_back(a);

  std::vector<std::vector<Eigen::MatrixXcd>> out;
  for (const auto& blk : layout.blocks) {
    const int ups = (N + blk.twoj) / 2;  // highest weight m = j
    const auto& src = by_pop[ups];
    Eigen::MatrixXcd hw;
    if (ups == N) {
      hw = Eigen::MatrixXcd::Ones(1, 1);
    } else {
      // S+ from popcount ups to ups+1, restricted to the two subspaces
      const auto& dst = by_pop[ups + 1];
      std::map<Eigen::Index, Eigen::Index> pos;
      for (std::size_t r = 0; r < dst.size(); ++r) pos[dst[r]] = static_cast<Eigen::Index>(r);
      Eigen::MatrixXcd sp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dst.size()), static_cast<Eigen::Index>(src.size()));
      for (std::size_t c = 0; c < src.size(); ++c) {
        for (int i = 0; i < N; ++i) {
          if (!(src[c] & (Eigen::Index{1} << i))) sp(pos[src[c] | (Eigen::Index{1} << i)], static_cast<Eigen::Index>(c)) += 1.0;
        }
      }
      const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sp, Eigen::ComputeFullV);
      const Eigen::Index rank = (svd.singularValues().array() > 1e-10).count();
      hw = svd.matrixV().rightCols(static_cast<Eigen::Index>(src.size()) - rank);
    }
    if (hw.cols() != static_cast<Eigen::Index>(blk.degeneracy_exact)) throw SolverError("irrep_bases: multiplicity mismatch");

    std::vector<Eigen::MatrixXcd> copies;
    for (Eigen::Index c = 0; c < hw.cols(); ++c) {
      Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(dim, blk.dim);
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
      for (std::size_t r = 0; r < src.size(); ++r) v[src[r]] = hw(static_cast<Eigen::Index>(r), c);
      V.col(0) = v;
      for (int k = 1; k < blk.dim; ++k) {
        v = apply_lowering(v, N);
        v /= v.norm();
        V.col(k) = v;
      }
      copies.push_back(std::move(V));
    }
    out.push_back(std::move(copies));
  }
  return out;
}

namespace {

Eigen::MatrixXcd embed(const DickeBlockMatrix& m, bool divide_by_degeneracy) {
  const int N = m.layout().N;
  const auto bases = irrep_bases(N);
  const Eigen::Index dim = Eigen::Index{1} << N;
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t b = 0; b < m.num_blocks(); ++b) {
    const double scale = divide_by_degeneracy ? 1.0 / m.layout().blocks[b].degeneracy : 1.0;
    const Eigen::MatrixXcd blk = scale * Eigen::MatrixXcd(m.block(b));
    for (const auto& V : bases[b]) full += V * blk * V.adjoint();
  }
  return full;
}

}  // namespace

Eigen::MatrixXcd embed_in_product_basis(const DickeBlockMatrix& rho) { return embed(rho, true); }

Eigen::MatrixXcd embed_operator_in_product_basis(const DickeBlockMatrix& op) { return embed(op, false); }

DickeBlockMatrix project_from_product_basis(const Eigen::MatrixXcd& rho, int N) {
  if (rho.rows() != (Eigen::Index{1} << N) || rho.cols() != rho.rows()) throw DomainError("project_from_product_basis: shape");
  const auto bases = irrep_bases(N);
  DickeBlockMatrix out(shared_layout(N));
  for (std::size_t b = 0; b < out.num_blocks(); ++b) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(out.layout().blocks[b].dim, out.layout().blocks[b].dim);
    for (const auto& V : bases[b]) acc += V.adjoint() * rho * V;
    out.block(b) = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[8] = {'P', 'I', 'X', 'Y', 'Z', 'D', 'B', 'M'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ConfigError("truncated block-matrix stream");
  return v;
}

}  // namespace

void write_binary(std::ostream& out, const DickeBlockMatrix& m) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::int32_t>(out, m.layout().N);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(m.num_blocks()));
  for (const auto& b : m.layout().blocks) {
    put<std::int32_t>(out, b.twoj);
    put<std::int32_t>(out, b.dim);
  }
  out.write(reinterpret_cast<const char*>(m.data().data()), static_cast<std::streamsize>(m.data().size() * sizeof(cplx)));
  if (!out) throw Error("write_binary: stream error");
}

DickeBlockMatrix read_binary(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw ConfigError("not a block-matrix stream");
  if (take<std::uint32_t>(in) != kVersion) throw ConfigError("unsupported block-matrix version");
  const int N = take<std::int32_t>(in);
  DickeBlockMatrix m(shared_layout(N));
  if (take<std::uint32_t>(in) != m.num_blocks()) throw ConfigError("block count does not match N");
  for (const auto& b : m.layout().blocks) {
    const int twoj = take<std::int32_t>(in);
    const int dim = take<std::int32_t>(in);
    if (twoj != b.twoj || dim != b.dim) throw ConfigError("block header does not match N");
  }
  in.read(reinterpret_cast<char*>(m.data().data()), static_cast<std::streamsize>(m.data().size() * sizeof(cplx)));
  if (!in) throw ConfigError("truncated block-matrix stream");
  return m;
}

std::string to_json(const DickeBlockMatrix& m) {
  nlohmann::json doc;
  doc["format"] = "pixyz-block-matrix";
  doc["version"] = kVersion;
  doc["N"] = m.layout().N;
  auto& blocks = doc["blocks"] = nlohmann::json::array();
  for (std::size_t b = 0; b < m.num_blocks(); ++b) {
    const auto& info = m.layout().blocks[b];
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    const auto blk = m.block(b);
    for (int r = 0; r < info.dim; ++r) {
      for (int c = 0; c < info.dim; ++c) {
        re.push_back(blk(r, c).real());
        im.push_back(blk(r, c).imag());
      }
    }
    blocks.push_back({{"twoj", info.twoj}, {"dim", info.dim}, {"degeneracy", to_string(info.degeneracy_exact)},
                      {"re", std::move(re)}, {"im", std::move(im)}});
  }
  return doc.dump();
}

DickeBlockMatrix from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
    DickeBlockMatrix m(shared_layout(doc.at("N").get<int>()));
    const auto& blocks = doc.at("blocks");
    if (blocks.size() != m.num_blocks()) throw ConfigError("block count does not match N");
    for (std::size_t b = 0; b < m.num_blocks(); ++b) {
      const auto& info = m.layout().blocks[b];
      const auto& jb = blocks[b];
      if (jb.at("twoj").get<int>() != info.twoj || jb.at("dim").get<int>() != info.dim) {
        throw ConfigError("block header does not match N");
      }
      const auto re = jb.at("re").get<std::vector<double>>();
      const auto im = jb.at("im").get<std::vector<double>>();
      const std::size_t n = static_cast<std::size_t>(info.dim) * info.dim;
      if (re.size() != n || im.size() != n) throw ConfigError("block data has the wrong length");
      for (std::size_t i = 0; i < n; ++i) m.data()[info.offset + i] = cplx(re[i], im[i]);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid block-matrix JSON: ") + e.what());
  }
}

}  // namespace pixyz
