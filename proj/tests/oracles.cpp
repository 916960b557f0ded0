#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace sixv::oracle {

namespace {

// weight of (i1, j1; i2, j2) in {0,1}: zero unless arrow-conserving
double w6v(int i1, int j1, int i2, int j2, double b1, double b2) {
    if (i1 + j1 != i2 + j2) return 0.0;
    if (i1 == i2) {
        if (i1 == 1 && j1 == 0) return b1;
        if (i1 == 0 && j1 == 1) return b2;
        return 1.0;
    }
    if (i1 == 1 && j1 == 0) return 1.0 - b1;
    if (i1 == 0 && j1 == 1) return 1.0 - b2;
    return 0.0;
}

void line_dfs(const std::vector<uint8_t>& occ_in, int64_t n_total, int64_t x, int h,
              std::vector<uint8_t>& out, double weight, double b1, double b2,
              std::map<uint64_t, double>& law) {
    if (weight == 0.0) return;
    if (x == n_total) {
        // a path still traveling exits the tracked range; all of its future
        // choices sum to one, so the weight lands in the escape bucket
        law[encode_line_outcome(out, h == 1)] += weight;
        return;
    }
    int i1 = x < static_cast<int64_t>(occ_in.size()) ? occ_in[static_cast<size_t>(x)] : 0;
    for (int i2 = 0; i2 <= 1; ++i2) {
        int j2 = i1 + h - i2;
        if (j2 < 0 || j2 > 1) continue;
        double wv = w6v(i1, h, i2, j2, b1, b2);
        if (wv == 0.0) continue;
        out[static_cast<size_t>(x)] = static_cast<uint8_t>(i2);
        line_dfs(occ_in, n_total, x + 1, j2, out, weight * wv, b1, b2, law);
    }
    out[static_cast<size_t>(x)] = 0;
}

}  // namespace

uint64_t encode_line_outcome(const std::vector<uint8_t>& occ_out, bool escaped) {
    if (occ_out.size() > 62) throw std::runtime_error("outcome too wide to encode");
    uint64_t key = escaped ? (uint64_t{1} << 63) : 0;
    for (size_t i = 0; i < occ_out.size(); ++i) key |= static_cast<uint64_t>(occ_out[i] & 1) << i;
    return key;
}

std::map<uint64_t, double> line_row_law(const std::vector<uint8_t>& occ_in, int64_t extend, double b1,
                                        double b2) {
    int64_t n_total = static_cast<int64_t>(occ_in.size()) + extend;
    std::map<uint64_t, double> law;
    std::vector<uint8_t> out(static_cast<size_t>(n_total), 0);
    line_dfs(occ_in, n_total, 0, 0, out, 1.0, b1, b2, law);
    return law;
}

uint64_t encode_ring_outcome(const std::vector<uint8_t>& occ_out) {
    return encode_line_outcome(occ_out, false);
}

std::map<uint64_t, double> ring_row_law(const std::vector<uint8_t>& occ_in, double b1, double b2,
                                        bool exclude_wrap) {
    int64_t n = static_cast<int64_t>(occ_in.size());
    if (n > 20) throw std::runtime_error("ring too large for brute force");
    std::map<uint64_t, double> law;
    double z = 0.0;
    for (uint64_t h_bits = 0; h_bits < (uint64_t{1} << n); ++h_bits) {
        if (exclude_wrap && h_bits + 1 == (uint64_t{1} << n)) continue;
        double weight = 1.0;
        std::vector<uint8_t> out(static_cast<size_t>(n), 0);
        for (int64_t x = 0; x < n && weight > 0.0; ++x) {
            int j1 = (h_bits >> x) & 1;
            int j2 = (h_bits >> ((x + 1) % n)) & 1;
            int i1 = occ_in[static_cast<size_t>(x)];
            int i2 = i1 + j1 - j2;
            if (i2 < 0 || i2 > 1) {
                weight = 0.0;
                break;
            }
            weight *= w6v(i1, j1, i2, j2, b1, b2);
            out[static_cast<size_t>(x)] = static_cast<uint8_t>(i2);
        }
        if (weight > 0.0) {
            law[encode_ring_outcome(out)] += weight;
            z += weight;
        }
    }
    for (auto& kv : law) kv.second /= z;
    return law;
}

namespace {

// multi-class weight; labels mapped so that 0 (empty) compares as the
// largest class
double wmc(int i1, int j1, int i2, int j2, int n_classes, double b1, double b2) {
    auto rank = [n_classes](int c) { return c == 0 ? n_classes + 1 : c; };
    if (i1 == j1) return (i2 == i1 && j2 == j1) ? 1.0 : 0.0;
    bool keep = (i2 == i1 && j2 == j1);
    bool swap = (i2 == j1 && j2 == i1);
    if (!keep && !swap) return 0.0;
    if (rank(i1) < rank(j1)) return keep ? b1 : 1.0 - b1;
    return keep ? b2 : 1.0 - b2;
}

void mc_dfs(const std::vector<int>& cls_in, int n_classes, int64_t n_total, int64_t x, int h,
            std::vector<int>& out, double weight, double b1, double b2,
            std::map<uint64_t, double>& law) {
    if (weight == 0.0) return;
    if (x == n_total) {
        law[encode_multiclass_outcome(out, n_classes, h)] += weight;
        return;
    }
    int i1 = x < static_cast<int64_t>(cls_in.size()) ? cls_in[static_cast<size_t>(x)] : 0;
    // candidate outputs: keep or swap
    const int cand[2][2] = {{i1, h}, {h, i1}};
    for (int c = 0; c < (i1 == h ? 1 : 2); ++c) {
        int i2 = cand[c][0], j2 = cand[c][1];
        double wv = wmc(i1, h, i2, j2, n_classes, b1, b2);
        if (wv == 0.0) continue;
        out[static_cast<size_t>(x)] = i2;
        mc_dfs(cls_in, n_classes, n_total, x + 1, j2, out, weight * wv, b1, b2, law);
    }
    out[static_cast<size_t>(x)] = 0;
}

}  // namespace

uint64_t encode_multiclass_outcome(const std::vector<int>& cls_out, int n_classes, int escaped_class) {
    int bits = 1;
    while ((1 << bits) <= n_classes) ++bits;
    if (static_cast<int>(cls_out.size() + 1) * bits > 62)
        throw std::runtime_error("outcome too wide to encode");
    uint64_t key = 0;
    int shift = 0;
    for (int c : cls_out) {
        key |= static_cast<uint64_t>(c) << shift;
        shift += bits;
    }
    key |= static_cast<uint64_t>(escaped_class) << shift;
    return key;
}

std::map<uint64_t, double> multiclass_row_law(const std::vector<int>& cls_in, int n_classes,
                                              int64_t extend, double b1, double b2) {
    int64_t n_total = static_cast<int64_t>(cls_in.size()) + extend;
    std::map<uint64_t, double> law;
    std::vector<int> out(static_cast<size_t>(n_total), 0);
    mc_dfs(cls_in, n_classes, n_total, 0, 0, out, 1.0, b1, b2, law);
    return law;
}

LawCheck compare_counts(const std::map<uint64_t, double>& law,
                        const std::map<uint64_t, int64_t>& counts, int64_t total, double n_sigma) {
    LawCheck check;
    check.n_outcomes = static_cast<int64_t>(law.size());
    double n = static_cast<double>(total);
    for (const auto& kv : counts) {
        if (law.find(kv.first) == law.end()) {
            check.ok = false;
            check.worst_z = 1e18;  // impossible outcome observed
            return check;
        }
    }
    for (const auto& kv : law) {
        double p = kv.second;
        auto it = counts.find(kv.first);
        double observed = it == counts.end() ? 0.0 : static_cast<double>(it->second);
        double sd = std::sqrt(std::max(p * (1.0 - p), 1e-300) * n);
        double z = std::abs(observed - p * n) / sd;
        check.worst_z = std::max(check.worst_z, z);
        if (z > n_sigma) check.ok = false;
    }
    return check;
}

}  // namespace sixv::oracle
