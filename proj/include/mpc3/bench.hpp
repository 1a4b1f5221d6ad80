#pragma once

#include <chrono>

#include "mpc3/pprkn.hpp"
#include "mpc3/trio.hpp"

namespace mpc3::bench {

// Round/byte metering harness. The counting convention, printed with every
// report: one round per dependency barrier; frames that can travel
// concurrently between distinct party pairs inside a barrier count once;
// helper-dealt correlated material counts one delivery barrier per protocol
// invocation.

inline const char* kRoundConvention =
    "one round per dependency barrier; concurrent frames between distinct\n"
    "party pairs in a barrier count once; helper-dealt material counts one\n"
    "delivery barrier per protocol invocation";

struct PrimitiveRow {
    std::string op;
    u64 measured = 0;
    u64 reference = 0; // the published complexity table
    std::string note;  // empty when they match
};

// Reference complexities of the protocol suite.
inline const std::vector<std::pair<std::string, u64>> kReferenceRounds = {
    {"MUL", 2}, {"DP", 2},  {"MOC", 4},     {"MSB", 4},
    {"CMP", 4}, {"MUX", 2}, {"EXP", 24},    {"INVSQRT", 15},
};

// What this implementation's inverse square root actually meters, and why
// it differs from the reference value.
inline constexpr u64 kInvsqrtMeasuredRounds = 9;
inline const char* kInvsqrtDeviationNote =
    "deviation from the reference tally (15): under the barrier convention this "
    "flow costs 3 barriers (masked Gram to the helper, the helper's eigen return, "
    "the partial unmasker) plus three triple-backed products at 2 rounds each; "
    "the reference count assumes a more sequential message schedule";

inline std::vector<PrimitiveRow> measure_primitive_rounds(u64 seed) {
    const FixedPointConfig cfg{64, 20};
    const Ring ring = cfg.ring();
    std::mt19937_64 rng(seed ^ 0xBE);

    auto splitv = [&](const std::vector<u64>& vals) {
        ArithVec s0(vals.size()), s1(vals.size());
        for (size_t i = 0; i < vals.size(); ++i) {
            auto [a, b] = split(vals[i], ring, rng);
            s0[i].v = a;
            s1[i].v = b;
        }
        return std::make_pair(s0, s1);
    };

    std::vector<u64> xs(4, encode(0.5, cfg)), ys(4, encode(-0.25, cfg)), bs(4, 1);
    auto [x0, x1] = splitv(xs);
    auto [y0, y1] = splitv(ys);
    auto [b0, b1] = splitv(bs);

    std::vector<u64> gram(16, 0);
    for (int i = 0; i < 4; ++i) gram[static_cast<size_t>(i * 4 + i)] = encode(1.0, cfg);
    auto [g0, g1] = splitv(gram);

    std::vector<u64> half_vals(4, 9);
    HalfVec h0(4), h1(4);
    for (size_t i = 0; i < 4; ++i) {
        auto [a, b] = split(half_vals[i], cfg.half_ring(), rng);
        h0[i].v = a;
        h1[i].v = b;
    }

    auto run = [&](u64 s, auto fn) {
        TrioOptions opt;
        opt.cfg = cfg;
        opt.seed = s;
        return run_trio(opt, fn);
    };

    std::map<std::string, u64> measured;
    auto record = [&](const Meter& m) {
        for (const auto& [op, stats] : m.stats())
            if (stats.calls > 0 && !measured.count(op)) measured[op] = stats.rounds / stats.calls;
    };

    record(run(seed + 1, [&](ProtocolContext& ctx) -> int {
               auto& a = ctx.role == PartyRole::Proxy1 ? x1 : x0;
               auto& b = ctx.role == PartyRole::Proxy1 ? y1 : y0;
               mul(ctx, a, b);
               return 0;
           }).meters[0]);
    record(run(seed + 2, [&](ProtocolContext& ctx) -> int {
               auto& a = ctx.role == PartyRole::Proxy1 ? x1 : x0;
               auto& b = ctx.role == PartyRole::Proxy1 ? y1 : y0;
               dot_product(ctx, a, b);
               return 0;
           }).meters[0]);
    record(run(seed + 3, [&](ProtocolContext& ctx) -> int {
               auto& a = ctx.role == PartyRole::Proxy1 ? h1 : h0;
               modulus_conversion(ctx, a);
               return 0;
           }).meters[0]);
    record(run(seed + 4, [&](ProtocolContext& ctx) -> int {
               auto& a = ctx.role == PartyRole::Proxy1 ? x1 : x0;
               most_significant_bit(ctx, a);
               return 0;
           }).meters[0]);
    {
        // CMP nests MSB; record CMP's own figure separately.
        auto m = run(seed + 5, [&](ProtocolContext& ctx) -> int {
                    auto& a = ctx.role == PartyRole::Proxy1 ? x1 : x0;
                    auto& b = ctx.role == PartyRole::Proxy1 ? y1 : y0;
                    compare(ctx, a, b);
                    return 0;
                }).meters[0];
        measured["CMP"] = m.stats().at("CMP").rounds;
    }
    record(run(seed + 6, [&](ProtocolContext& ctx) -> int {
               auto& a = ctx.role == PartyRole::Proxy1 ? x1 : x0;
               auto& b = ctx.role == PartyRole::Proxy1 ? y1 : y0;
               auto& c = ctx.role == PartyRole::Proxy1 ? b1 : b0;
               multiplexer(ctx, a, b, c);
               return 0;
           }).meters[0]);
    {
        auto m = run(seed + 7, [&](ProtocolContext& ctx) -> int {
                    auto& a = ctx.role == PartyRole::Proxy1 ? x1 : x0;
                    exponential(ctx, a, 2.0);
                    return 0;
                }).meters[0];
        measured["EXP"] = m.stats().at("EXP").rounds;
    }
    {
        auto m = run(seed + 8, [&](ProtocolContext& ctx) -> int {
                    auto& a = ctx.role == PartyRole::Proxy1 ? g1 : g0;
                    invsqrt(ctx, a, 4);
                    return 0;
                }).meters[0];
        measured["INVSQRT"] = m.stats().at("INVSQRT").rounds;
    }

    std::vector<PrimitiveRow> rows;
    for (const auto& [op, reference] : kReferenceRounds) {
        PrimitiveRow row;
        row.op = op;
        row.reference = reference;
        row.measured = measured.count(op) ? measured.at(op) : 0;
        if (row.measured != row.reference)
            row.note = (op == "INVSQRT" && row.measured == kInvsqrtMeasuredRounds)
                           ? kInvsqrtDeviationNote
                           : "UNEXPECTED deviation";
        rows.push_back(row);
    }
    return rows;
}

// One scaling measurement: a full private inference at the given dimensions.
struct SweepRow {
    std::string mode;
    size_t q, k, d, s;
    u64 rounds = 0;
    u64 bytes_p0 = 0, bytes_p1 = 0, bytes_p2 = 0;
    double wall_ms = 0;
};

inline const char* kSweepCsvHeader = "mode,q,k,d,s,rounds,bytes_p0,bytes_p1,bytes_p2,bytes_total,wall_ms";

inline SweepRow run_sweep_point(size_t q, size_t k, size_t s, GramMode mode, u64 seed) {
    const FixedPointConfig cfg{64, 20};
    const size_t d = 4;
    auto model = make_synthetic_model(q, k, d, seed);
    std::mt19937_64 seq_rng(seed ^ 0x5E9);
    std::string text;
    const std::string alphabet = "ACGT";
    for (size_t i = 0; i < s; ++i) text.push_back(alphabet[seq_rng() % 4]);
    auto seq = encode_sequence(text, alphabet);

    std::mt19937_64 rng(seed ^ 0x0575);
    auto [m0, m1] = outsource_model(model, cfg, rng, mode);
    auto [s0, s1] = outsource_sequence(seq, cfg, rng);
    SharedRknModel mstub = SharedRknModel::public_stub(m0);
    SharedSequence sstub = SharedSequence::public_stub(s0);

    TrioOptions opt;
    opt.cfg = cfg;
    opt.seed = seed;
    auto start = std::chrono::steady_clock::now();
    auto res = run_trio(opt, [&](ProtocolContext& ctx) -> InferenceResult {
        const SharedRknModel& m = ctx.role == PartyRole::Proxy0   ? m0
                                  : ctx.role == PartyRole::Proxy1 ? m1
                                                                  : mstub;
        const SharedSequence& sq = ctx.role == PartyRole::Proxy0   ? s0
                                   : ctx.role == PartyRole::Proxy1 ? s1
                                                                   : sstub;
        return private_inference(ctx, m, sq);
    });
    auto stop = std::chrono::steady_clock::now();

    SweepRow row;
    row.mode = mode == GramMode::Outsourced ? "outsourced" : "invsqrt";
    row.q = q;
    row.k = k;
    row.d = d;
    row.s = s;
    row.rounds = res.meters[0].stats().at("INFER").rounds;
    row.bytes_p0 = res.meters[0].total_bytes();
    row.bytes_p1 = res.meters[1].total_bytes();
    row.bytes_p2 = res.meters[2].total_bytes();
    row.wall_ms =
        std::chrono::duration_cast<std::chrono::microseconds>(stop - start).count() / 1000.0;
    return row;
}

inline std::string sweep_row_csv(const SweepRow& r) {
    std::ostringstream out;
    out << r.mode << ',' << r.q << ',' << r.k << ',' << r.d << ',' << r.s << ',' << r.rounds
        << ',' << r.bytes_p0 << ',' << r.bytes_p1 << ',' << r.bytes_p2 << ','
        << (r.bytes_p0 + r.bytes_p1 + r.bytes_p2) << ',' << r.wall_ms;
    return out.str();
}

// Least-squares fit quality for y against the given predictor columns
// (including the intercept). R^2 = 1 when the residuals vanish, including
// the degenerate all-equal case.
inline double fit_r_squared(const std::vector<std::vector<double>>& predictors,
                            const std::vector<double>& y) {
    const size_t n = y.size();
    const size_t p = predictors.size();
    // Normal equations, tiny dimensions: X^T X beta = X^T y.
    std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t a = 0; a < p; ++a) {
            for (size_t b = 0; b < p; ++b) xtx[a * p + b] += predictors[a][i] * predictors[b][i];
            xty[a] += predictors[a][i] * y[i];
        }
    // Gaussian elimination.
    std::vector<double> beta = xty;
    std::vector<double> mat = xtx;
    for (size_t col = 0; col < p; ++col) {
        size_t piv = col;
        for (size_t r2 = col + 1; r2 < p; ++r2)
            if (std::fabs(mat[r2 * p + col]) > std::fabs(mat[piv * p + col])) piv = r2;
        for (size_t cc = 0; cc < p; ++cc) std::swap(mat[col * p + cc], mat[piv * p + cc]);
        std::swap(beta[col], beta[piv]);
        double diag = mat[col * p + col];
        if (std::fabs(diag) < 1e-12) continue;
        for (size_t r2 = 0; r2 < p; ++r2) {
            if (r2 == col) continue;
            double f = mat[r2 * p + col] / diag;
            for (size_t cc = 0; cc < p; ++cc) mat[r2 * p + cc] -= f * mat[col * p + cc];
            beta[r2] -= f * beta[col];
        }
    }
    for (size_t col = 0; col < p; ++col)
        beta[col] = std::fabs(mat[col * p + col]) < 1e-12 ? 0.0 : beta[col] / mat[col * p + col];

    double mean = 0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < n; ++i) {
        double fit = 0;
        for (size_t a = 0; a < p; ++a) fit += beta[a] * predictors[a][i];
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    if (ss_res <= 1e-9 * std::max(1.0, ss_tot)) return 1.0;
    if (ss_tot == 0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

} // namespace mpc3::bench
