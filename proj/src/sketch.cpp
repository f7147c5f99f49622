#include "sketchreg/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sketchreg/rng.hpp"

namespace sketchreg {

std::string family_name(SketchFamily f) {
    switch (f) {
        case SketchFamily::Gaussian: return "gaussian";
        case SketchFamily::Srht: return "srht";
        case SketchFamily::CountSketch: return "countsketch";
        case SketchFamily::LeverageScore: return "leverage";
        case SketchFamily::Composed: return "composed";
    }
    return "?";
}

namespace {

void check_m_n(std::size_t m, std::size_t n, const char* who) {
    if (m < 1 || n < 1 || m > n)
        throw InvalidDimensions(std::string(who) + ": need 1 <= m <= n, got m=" +
                                std::to_string(m) + " n=" + std::to_string(n));
}

}  // namespace

SketchOperator make_gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
    check_m_n(m, n, "make_gaussian");
    SketchOperator s;
    s.family_ = SketchFamily::Gaussian;
    s.m_ = m;
    s.n_ = n;
    s.seed_ = seed;
    s.gauss_entries_.resize(m * n);
    Rng rng = SeedStream{seed, 0}.rng();
    rng.fill_normal(s.gauss_entries_.data(), m * n, 1.0 / std::sqrt(static_cast<double>(m)));
    return s;
}

SketchOperator make_srht(std::size_t m, std::size_t n, std::uint64_t seed) {
    if (!is_power_of_two(n)) throw NonPowerOfTwo("make_srht: n must be a power of two");
    check_m_n(m, n, "make_srht");
    SketchOperator s;
    s.family_ = SketchFamily::Srht;
    s.m_ = m;
    s.n_ = n;
    s.seed_ = seed;
    Rng sign_rng = SeedStream{seed, 0}.rng();
    s.srht_signs_.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.srht_signs_[i] = static_cast<std::int8_t>(sign_rng.sign());
    Rng row_rng = SeedStream{seed, 1}.rng();
    s.srht_rows_.resize(m);
    std::vector<std::uint32_t> pool;
    sample_without_replacement(row_rng, static_cast<std::uint32_t>(n),
                               static_cast<std::uint32_t>(m), pool, s.srht_rows_.data());
    return s;
}

SketchOperator make_countsketch(std::size_t m, std::size_t n, std::size_t s_nnz,
                                std::uint64_t seed) {
    if (s_nnz > m)
        throw SparsityExceedsRows("make_countsketch: s=" + std::to_string(s_nnz) + " > m=" +
                                  std::to_string(m));
    if (s_nnz < 1 || m < 1 || n < 1)
        throw InvalidDimensions("make_countsketch: m, n, s must be positive");
    if (m > n) throw InvalidDimensions("make_countsketch: need m <= n");
    SketchOperator s;
    s.family_ = SketchFamily::CountSketch;
    s.m_ = m;
    s.n_ = n;
    s.s_ = s_nnz;
    s.seed_ = seed;
    s.cs_rows_.resize(n * s_nnz);
    s.cs_signs_.resize(n * s_nnz);
    Rng pos_rng = SeedStream{seed, 0}.rng();
    Rng sign_rng = SeedStream{seed, 1}.rng();  // signs independent of positions
    std::vector<std::uint32_t> pool;
    for (std::size_t j = 0; j < n; ++j) {
        sample_without_replacement(pos_rng, static_cast<std::uint32_t>(m),
                                   static_cast<std::uint32_t>(s_nnz), pool,
                                   s.cs_rows_.data() + j * s_nnz);
        for (std::size_t t = 0; t < s_nnz; ++t)
            s.cs_signs_[j * s_nnz + t] = static_cast<std::int8_t>(sign_rng.sign());
    }
    return s;
}

std::vector<double> leverage_scores(const Matrix& a) {
    ThinFactorization f = thin_svd(a);
    if (f.rank < a.cols())
        throw RankDeficient("leverage_scores: numerical rank " + std::to_string(f.rank) +
                            " < " + std::to_string(a.cols()));
    std::vector<double> scores(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < f.u.cols(); ++k) acc += f.u(i, k) * f.u(i, k);
        scores[i] = acc;
    }
    return scores;
}

SketchOperator make_leverage_sampler(const std::vector<double>& scores, std::size_t m,
                                     std::uint64_t seed) {
    if (m < 1) throw InvalidDimensions("make_leverage_sampler: m must be positive");
    const std::size_t n = scores.size();
    if (m > n) throw InvalidDimensions("make_leverage_sampler: need m <= n");
    double total = 0.0;
    for (double s : scores) {
        if (s < 0.0) throw InvalidParams("leverage scores must be nonnegative");
        total += s;
    }
    if (total <= 0.0) throw InvalidParams("leverage scores sum to zero");

    std::vector<double> cum(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += scores[i];
        cum[i] = acc;
    }

    SketchOperator s;
    s.family_ = SketchFamily::LeverageScore;
    s.m_ = m;
    s.n_ = n;
    s.seed_ = seed;
    s.lev_rows_.resize(m);
    s.lev_weights_.resize(m);
    Rng rng = SeedStream{seed, 0}.rng();
    const double md = static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double u = rng.uniform() * total;
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cum.begin());
        if (idx >= n) idx = n - 1;
        // zero-score rows have zero cdf mass; land on the next positive one
        while (scores[idx] == 0.0 && idx + 1 < n) ++idx;
        const double p = scores[idx] / total;
        s.lev_rows_[k] = static_cast<std::uint32_t>(idx);
        s.lev_weights_[k] = 1.0 / std::sqrt(md * p);
    }
    return s;
}

SketchOperator make_leverage_sampler(const Matrix& a, std::size_t m, std::uint64_t seed) {
    return make_leverage_sampler(leverage_scores(a), m, seed);
}

SketchOperator compose(const SketchOperator& outer, const SketchOperator& inner) {
    if (outer.n() != inner.m())
        throw DimensionMismatch("compose: outer.n=" + std::to_string(outer.n()) +
                                " != inner.m=" + std::to_string(inner.m()));
    SketchOperator s;
    s.family_ = SketchFamily::Composed;
    s.m_ = outer.m();
    s.n_ = inner.n();
    auto push = [&](const SketchOperator& op) {
        if (op.family() == SketchFamily::Composed)
            for (const auto& c : op.children()) s.children_.push_back(c);
        else
            s.children_.push_back(std::make_shared<const SketchOperator>(op));
    };
    push(outer);
    push(inner);
    return s;
}

namespace {
constexpr std::size_t kSrhtBlock = 8;
}  // namespace

Matrix apply_sketch(const SketchOperator& s, const Matrix& in) {
    if (in.rows() != s.n())
        throw DimensionMismatch("apply_sketch: input rows " + std::to_string(in.rows()) +
                                " != n " + std::to_string(s.n()));
    const std::size_t m = s.m(), n = s.n(), k = in.cols();
    switch (s.family()) {
        case SketchFamily::Gaussian: {
            Matrix out(m, k);
            for (std::size_t i = 0; i < m; ++i) {
                double* oi = out.row_ptr(i);
                const double* si = s.gauss_entries_.data() + i * n;
                for (std::size_t l = 0; l < n; ++l) {
                    const double w = si[l];
                    const double* bl = in.row_ptr(l);
                    for (std::size_t j = 0; j < k; ++j) oi[j] += w * bl[j];
                }
            }
            return out;
        }
        case SketchFamily::Srht: {
            Matrix out(m, k);
            const double scale = 1.0 / std::sqrt(static_cast<double>(m));
            std::vector<double> buf(kSrhtBlock * n);
            for (std::size_t j0 = 0; j0 < k; j0 += kSrhtBlock) {
                const std::size_t w = std::min(kSrhtBlock, k - j0);
                for (std::size_t i = 0; i < n; ++i) {
                    const double sg = static_cast<double>(s.srht_signs_[i]);
                    const double* row = in.row_ptr(i) + j0;
                    for (std::size_t t = 0; t < w; ++t) buf[t * n + i] = sg * row[t];
                }
                for (std::size_t t = 0; t < w; ++t) fwht_inplace(buf.data() + t * n, n);
                for (std::size_t r = 0; r < m; ++r) {
                    const std::size_t src = s.srht_rows_[r];
                    double* orow = out.row_ptr(r) + j0;
                    for (std::size_t t = 0; t < w; ++t) orow[t] = scale * buf[t * n + src];
                }
            }
            return out;
        }
        case SketchFamily::CountSketch: {
            Matrix out(m, k);
            const std::size_t nnz = s.sparsity();
            const double scale = 1.0 / std::sqrt(static_cast<double>(nnz));
            for (std::size_t j = 0; j < n; ++j) {
                const double* irow = in.row_ptr(j);
                for (std::size_t t = 0; t < nnz; ++t) {
                    const std::size_t r = s.cs_rows_[j * nnz + t];
                    const double w = scale * static_cast<double>(s.cs_signs_[j * nnz + t]);
                    double* orow = out.row_ptr(r);
                    for (std::size_t c = 0; c < k; ++c) orow[c] += w * irow[c];
                }
            }
            return out;
        }
        case SketchFamily::LeverageScore: {
            Matrix out(m, k);
            for (std::size_t r = 0; r < m; ++r) {
                const double* irow = in.row_ptr(s.lev_rows_[r]);
                const double w = s.lev_weights_[r];
                double* orow = out.row_ptr(r);
                for (std::size_t c = 0; c < k; ++c) orow[c] = w * irow[c];
            }
            return out;
        }
        case SketchFamily::Composed: {
            Matrix cur = in;
            for (auto it = s.children().rbegin(); it != s.children().rend(); ++it)
                cur = apply_sketch(**it, cur);
            return cur;
        }
    }
    throw Error("apply_sketch: unknown family");
}

Vector apply_sketch(const SketchOperator& s, const Vector& v) {
    Matrix col = matrix_from_column(v);
    Matrix out = apply_sketch(s, col);
    return column_as_vector(out, 0);
}

Matrix materialize_sketch(const SketchOperator& s, std::size_t cap) {
    const std::size_t m = s.m(), n = s.n();
    if (n > cap)
        throw TooLarge("materialize_sketch: n=" + std::to_string(n) + " exceeds cap " +
                       std::to_string(cap));
    switch (s.family()) {
        case SketchFamily::Gaussian:
            return Matrix(m, n, s.gauss_entries_);
        case SketchFamily::Srht: {
            Matrix out(m, n);
            const double scale = 1.0 / std::sqrt(static_cast<double>(m));
            for (std::size_t r = 0; r < m; ++r) {
                const std::uint64_t row = s.srht_rows_[r];
                double* orow = out.row_ptr(r);
                for (std::size_t j = 0; j < n; ++j) {
                    const int par = __builtin_popcountll(row & j) & 1;
                    const double h = par ? -1.0 : 1.0;
                    orow[j] = scale * h * static_cast<double>(s.srht_signs_[j]);
                }
            }
            return out;
        }
        case SketchFamily::CountSketch: {
            Matrix out(m, n);
            const std::size_t nnz = s.sparsity();
            const double scale = 1.0 / std::sqrt(static_cast<double>(nnz));
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t t = 0; t < nnz; ++t)
                    out(s.cs_rows_[j * nnz + t], j) =
                        scale * static_cast<double>(s.cs_signs_[j * nnz + t]);
            return out;
        }
        case SketchFamily::LeverageScore: {
            Matrix out(m, n);
            for (std::size_t r = 0; r < m; ++r) out(r, s.lev_rows_[r]) = s.lev_weights_[r];
            return out;
        }
        case SketchFamily::Composed: {
            Matrix prod = materialize_sketch(*s.children().back(), cap);
            for (auto it = std::next(s.children().rbegin()); it != s.children().rend(); ++it)
                prod = matmul(materialize_sketch(**it, cap), prod);
            return prod;
        }
    }
    throw Error("materialize_sketch: unknown family");
}

std::string SketchOperator::to_json() const {
    std::string out = "{\"family\":\"" + family_name(family_) + "\"";
    char buf[64];
    std::snprintf(buf, sizeof(buf), ",\"m\":%zu,\"n\":%zu", m_, n_);
    out += buf;
    if (family_ == SketchFamily::CountSketch) {
        std::snprintf(buf, sizeof(buf), ",\"s\":%zu", s_);
        out += buf;
    }
    if (family_ == SketchFamily::Composed) {
        out += ",\"children\":[";
        for (std::size_t i = 0; i < children_.size(); ++i) {
            if (i) out += ',';
            out += children_[i]->to_json();
        }
        out += ']';
    } else {
        std::snprintf(buf, sizeof(buf), ",\"seed\":%llu",
                      static_cast<unsigned long long>(seed_));
        out += buf;
    }
    out += '}';
    return out;
}

CountSketchSupports::CountSketchSupports(const SketchOperator& s)
    : s_(s.sparsity()), rows_(s.cs_rows_.data()), signs_(s.cs_signs_.data()) {
    if (s.family() != SketchFamily::CountSketch)
        throw InvalidParams("CountSketchSupports: operator is not a Count-Sketch");
}

}  // namespace sketchreg
