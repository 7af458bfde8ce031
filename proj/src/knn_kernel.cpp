// Blocked brute-force cosine k-NN.
//
// Rows are normalized and zero-padded to a multiple of 8 columns and 4 rows so
// every similarity goes through the same 4x4 register tile. That keeps sim(i,j)
// bitwise equal to sim(j,i) and independent of how query blocks are spread
// over workers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "chargroup/affinity_graph.hpp"

namespace chargroup {

namespace {

using v8d = double __attribute__((vector_size(64)));
// Unaligned, aliasing-safe view used for loads.
using v8d_u = double __attribute__((vector_size(64), aligned(8), may_alias));

constexpr std::size_t kLanes = 8;
constexpr std::size_t kTile = 4;
constexpr std::size_t kQueryBlock = 256;
constexpr std::size_t kDataBlock = 256;

struct PaddedRows {
  std::size_t n = 0;       // real rows
  std::size_t rows = 0;    // padded to kTile
  std::size_t stride = 0;  // padded to kLanes
  std::vector<double> data;

  const double* row(std::size_t i) const { return data.data() + i * stride; }
};

PaddedRows pad_normalized(const FeatureMatrix& m) {
  PaddedRows p;
  p.n = m.rows();
  p.rows = (m.rows() + kTile - 1) / kTile * kTile;
  p.stride = (m.cols() + kLanes - 1) / kLanes * kLanes;
  p.data.assign(p.rows * p.stride, 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto src = m.row(i);
    double sq = 0;
    for (double v : src) sq += v * v;
    if (!(sq > 0) || !std::isfinite(sq))
      throw std::invalid_argument("zero-norm or non-finite embedding row " + std::to_string(i));
    const double inv = 1.0 / std::sqrt(sq);
    double* dst = p.data.data() + i * p.stride;
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c] * inv;
  }
  return p;
}

inline double lane_sum(v8d v) {
  return ((v[0] + v[1]) + (v[2] + v[3])) + ((v[4] + v[5]) + (v[6] + v[7]));
}

inline v8d load(const double* p) { return *reinterpret_cast<const v8d_u*>(p); }

// out[a][b] = <q_a, x_b> for 4 query rows and 4 data rows.
inline void dot_tile(const double* q, const double* x, std::size_t stride, double out[kTile][kTile]) {
  const double *q0 = q, *q1 = q + stride, *q2 = q + 2 * stride, *q3 = q + 3 * stride;
  const double *x0 = x, *x1 = x + stride, *x2 = x + 2 * stride, *x3 = x + 3 * stride;
  v8d a00 = {}, a01 = {}, a02 = {}, a03 = {}, a10 = {}, a11 = {}, a12 = {}, a13 = {};
  v8d a20 = {}, a21 = {}, a22 = {}, a23 = {}, a30 = {}, a31 = {}, a32 = {}, a33 = {};
  for (std::size_t t = 0; t < stride; t += kLanes) {
    const v8d y0 = load(x0 + t), y1 = load(x1 + t), y2 = load(x2 + t), y3 = load(x3 + t);
    v8d v = load(q0 + t);
    a00 += v * y0; a01 += v * y1; a02 += v * y2; a03 += v * y3;
    v = load(q1 + t);
    a10 += v * y0; a11 += v * y1; a12 += v * y2; a13 += v * y3;
    v = load(q2 + t);
    a20 += v * y0; a21 += v * y1; a22 += v * y2; a23 += v * y3;
    v = load(q3 + t);
    a30 += v * y0; a31 += v * y1; a32 += v * y2; a33 += v * y3;
  }
  out[0][0] = lane_sum(a00); out[0][1] = lane_sum(a01); out[0][2] = lane_sum(a02); out[0][3] = lane_sum(a03);
  out[1][0] = lane_sum(a10); out[1][1] = lane_sum(a11); out[1][2] = lane_sum(a12); out[1][3] = lane_sum(a13);
  out[2][0] = lane_sum(a20); out[2][1] = lane_sum(a21); out[2][2] = lane_sum(a22); out[2][3] = lane_sum(a23);
  out[3][0] = lane_sum(a30); out[3][1] = lane_sum(a31); out[3][2] = lane_sum(a32); out[3][3] = lane_sum(a33);
}

// Sorted top-k list for one query, best first; ties by ascending id.
struct TopK {
  double* sims;
  std::int32_t* ids;
  std::size_t k;
  std::size_t count = 0;

  void offer(double s, std::int32_t id) {
    if (count == k) {
      const double worst = sims[k - 1];
      if (s < worst || (s == worst && id > ids[k - 1])) return;
    } else {
      ++count;
    }
    std::size_t pos = count - 1;
    while (pos > 0 && (sims[pos - 1] < s || (sims[pos - 1] == s && ids[pos - 1] > id))) {
      sims[pos] = sims[pos - 1];
      ids[pos] = ids[pos - 1];
      --pos;
    }
    sims[pos] = s;
    ids[pos] = id;
  }
};

}  // namespace

FeatureMatrix normalized_rows(const FeatureMatrix& m) {
  FeatureMatrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = out.row(i);
    double sq = 0;
    for (double v : r) sq += v * v;
    if (!(sq > 0) || !std::isfinite(sq))
      throw std::invalid_argument("zero-norm or non-finite embedding row " + std::to_string(i));
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : r) v *= inv;
  }
  return out;
}

AffinityGraph build_knn_graph(const FeatureMatrix& embeddings, std::size_t k, Similarity) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = embeddings.rows();
  if (n == 0) throw std::invalid_argument("build_knn_graph: no rows");
  if (embeddings.cols() == 0) throw std::invalid_argument("build_knn_graph: zero-dimensional embeddings");
  if (k == 0) throw std::invalid_argument("build_knn_graph: k must be positive");
  if (n > static_cast<std::size_t>(INT32_MAX)) throw std::invalid_argument("build_knn_graph: too many rows");

  const PaddedRows x = pad_normalized(embeddings);
  const std::size_t kk = std::min(k, n - 1);

  std::vector<double> sims(n * kk);
  std::vector<std::int32_t> ids(n * kk);
  std::vector<std::size_t> counts(n, 0);

  const std::size_t n_qblocks = (x.rows + kQueryBlock - 1) / kQueryBlock;
  if (kk > 0) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t qb = 0; qb < n_qblocks; ++qb) {
      const std::size_t q_begin = qb * kQueryBlock;
      const std::size_t q_end = std::min(x.rows, q_begin + kQueryBlock);
      std::vector<TopK> heaps;
      heaps.reserve(q_end - q_begin);
      for (std::size_t i = q_begin; i < std::min(q_end, n); ++i)
        heaps.push_back(TopK{sims.data() + i * kk, ids.data() + i * kk, kk});

      double tile[kTile][kTile];
      double block[kTile][kDataBlock + kLanes];
      for (std::size_t d_begin = 0; d_begin < x.rows; d_begin += kDataBlock) {
        const std::size_t d_end = std::min(x.rows, d_begin + kDataBlock);
        for (std::size_t qi = q_begin; qi < q_end; qi += kTile) {
          for (std::size_t dj = d_begin; dj < d_end; dj += kTile) {
            dot_tile(x.row(qi), x.row(dj), x.stride, tile);
            for (std::size_t a = 0; a < kTile; ++a)
              for (std::size_t b = 0; b < kTile; ++b) block[a][dj - d_begin + b] = tile[a][b];
          }
          for (std::size_t a = 0; a < kTile; ++a)
            for (std::size_t jj = d_end - d_begin; jj % kLanes != 0; ++jj) block[a][jj] = -3.0;
          // Cheap threshold scan first; only candidates that can enter the list
          // take the slow path.
          for (std::size_t a = 0; a < kTile; ++a) {
            const std::size_t i = qi + a;
            if (i >= n) break;
            auto& h = heaps[i - q_begin];
            double floor = h.count == h.k ? h.sims[h.k - 1] : -2.0;
            const std::size_t width = d_end - d_begin;
            for (std::size_t c0 = 0; c0 < width; c0 += kLanes) {
              const v8d chunk = load(&block[a][c0]);
              const v8d fl = {floor, floor, floor, floor, floor, floor, floor, floor};
              const auto hit = chunk >= fl;
              bool any = false;
              for (std::size_t l = 0; l < kLanes; ++l) any |= hit[l] != 0;
              if (!any) continue;
              for (std::size_t jj = c0; jj < c0 + kLanes; ++jj) {
                if (block[a][jj] < floor) continue;
                const std::size_t j = d_begin + jj;
                if (j >= n || j == i) continue;
                h.offer(std::clamp(block[a][jj], -1.0, 1.0), static_cast<std::int32_t>(j));
                if (h.count == h.k) floor = h.sims[h.k - 1];
              }
            }
          }
        }
      }
      for (std::size_t i = q_begin; i < std::min(q_end, n); ++i) counts[i] = heaps[i - q_begin].count;
    }
  }

  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<Neighbor> entries;
  entries.reserve(n * kk);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < counts[i]; ++p) entries.push_back({ids[i * kk + p], sims[i * kk + p]});
    offsets[i + 1] = entries.size();
  }
  auto g = AffinityGraph::from_csr(std::move(offsets), std::move(entries), k);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  g.set_build_info(std::chrono::system_clock::now(), secs);
  return g;
}

}  // namespace chargroup
