#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>

#include "mpc3/eigen.hpp"
#include "mpc3/random.hpp"

namespace mpc3 {

// Plaintext recurrent kernel network: the reference implementation the
// private inference is checked against. A model holds q anchor motifs of
// length k over a d-dimensional character encoding, a forgetting factor
// lambda, the similarity sharpness alpha, a linear classifier w, and
// (optionally) the inverse square roots of the anchor-prefix Gram matrices.

struct PlainRknModel {
    size_t q = 0, k = 0, d = 0;
    double lambda = 0.5;
    double alpha_sim = 0.6;
    std::vector<double> anchors; // [level][anchor][dim], row-major k*q*d, unit per (level,anchor)
    std::vector<double> weights; // q
    std::vector<std::vector<double>> gram_invsqrt; // k matrices q*q, may be empty

    double anchor(size_t level, size_t a, size_t dim) const {
        return anchors[(level * q + a) * d + dim];
    }
    bool has_gram_invsqrt() const { return !gram_invsqrt.empty(); }
};

struct EncodedSequence {
    size_t length = 0, d = 0;
    std::vector<double> onehot; // length x d, rows one-hot or all-zero padding

    double at(size_t t, size_t dim) const { return onehot[t * d + dim]; }
};

inline void validate_model(const PlainRknModel& m) {
    if (m.q == 0 || m.k == 0 || m.d == 0) throw UsageError("model: dimensions must be positive");
    if (m.anchors.size() != m.k * m.q * m.d) throw UsageError("model: anchor tensor size mismatch");
    if (m.weights.size() != m.q) throw UsageError("model: weight size mismatch");
    if (!(m.lambda > 0 && m.lambda < 1)) throw UsageError("model: lambda must be in (0,1)");
    if (!(m.alpha_sim > 0)) throw UsageError("model: alpha must be positive");
    for (size_t l = 0; l < m.k; ++l)
        for (size_t a = 0; a < m.q; ++a) {
            double norm = 0;
            for (size_t i = 0; i < m.d; ++i) norm += m.anchor(l, a, i) * m.anchor(l, a, i);
            if (std::fabs(std::sqrt(norm) - 1.0) > 1e-6)
                throw UsageError("model: anchor (" + std::to_string(l) + "," + std::to_string(a) +
                                 ") is not L2-normalized");
        }
    if (!m.gram_invsqrt.empty()) {
        if (m.gram_invsqrt.size() != m.k) throw UsageError("model: need one Gram matrix per level");
        for (const auto& g : m.gram_invsqrt)
            if (g.size() != m.q * m.q) throw UsageError("model: Gram matrix size mismatch");
    }
}

// Prefix-kernel Gram matrix at level j (1-based): entry (a,b) multiplies the
// per-character similarities over the first j anchor characters, then a
// ridge 0.9 K + 0.1 I keeps the spectrum away from zero while preserving the
// unit diagonal.
inline std::vector<double> model_gram(const PlainRknModel& m, size_t level) {
    std::vector<double> gram(m.q * m.q);
    for (size_t a = 0; a < m.q; ++a)
        for (size_t b = 0; b < m.q; ++b) {
            double prod = 1.0;
            for (size_t l = 0; l < level; ++l) {
                double dot = 0;
                for (size_t i = 0; i < m.d; ++i) dot += m.anchor(l, a, i) * m.anchor(l, b, i);
                prod *= std::exp(m.alpha_sim * (dot - 1.0));
            }
            gram[a * m.q + b] = 0.9 * prod + (a == b ? 0.1 : 0.0);
        }
    return gram;
}

struct RknForward {
    double prediction = 0;
    // c[j][t][a] for j = 0..k, t = 0..s; c_0[t] is all-ones, c_j[0] is zero.
    std::vector<double> mappings;
    size_t k = 0, s = 0, q = 0;

    double c(size_t j, size_t t, size_t a) const { return mappings[(j * (s + 1) + t) * q + a]; }
};

// b_j[t][a] = exp(alpha (<x_t, z_j^a> - 1)); c_j[t] = lambda c_j[t-1]
// + c_{j-1}[t-1] (x) b_j[t]; prediction = <w, K^{-1/2} c_k[s]>.
inline RknForward rkn_forward(const PlainRknModel& m, const EncodedSequence& seq) {
    validate_model(m);
    if (seq.length == 0) throw UsageError("rkn_forward: empty sequence");
    if (seq.d != m.d) throw UsageError("rkn_forward: encoding dimension mismatch");

    RknForward out;
    out.k = m.k;
    out.s = seq.length;
    out.q = m.q;
    out.mappings.assign((m.k + 1) * (seq.length + 1) * m.q, 0.0);
    auto c = [&](size_t j, size_t t) { return out.mappings.data() + (j * (seq.length + 1) + t) * m.q; };
    for (size_t t = 0; t <= seq.length; ++t)
        for (size_t a = 0; a < m.q; ++a) c(0, t)[a] = 1.0;

    for (size_t t = 1; t <= seq.length; ++t) {
        for (size_t j = 1; j <= m.k; ++j) {
            for (size_t a = 0; a < m.q; ++a) {
                double dot = 0;
                for (size_t i = 0; i < m.d; ++i)
                    dot += seq.at(t - 1, i) * m.anchor(j - 1, a, i);
                double b = std::exp(m.alpha_sim * (dot - 1.0));
                c(j, t)[a] = m.lambda * c(j, t - 1)[a] + c(j - 1, t - 1)[a] * b;
            }
        }
    }

    // Models shipped without precomputed inverse roots fall back to the
    // plaintext eigendecomposition here.
    std::vector<double> r = m.has_gram_invsqrt() ? m.gram_invsqrt[m.k - 1]
                                                 : invsqrt_real(model_gram(m, m.k), m.q);
    double pred = 0;
    for (size_t i = 0; i < m.q; ++i) {
        double mapped = 0;
        for (size_t a = 0; a < m.q; ++a) mapped += r[i * m.q + a] * c(m.k, seq.length)[a];
        pred += m.weights[i] * mapped;
    }
    out.prediction = pred;
    return out;
}

// Final mapping K_j^{-1/2} c_j[s] for every level, for feature extraction.
inline std::vector<std::vector<double>> rkn_extract_features(const PlainRknModel& m,
                                                             const EncodedSequence& seq) {
    auto fwd = rkn_forward(m, seq);
    std::vector<std::vector<double>> feats(m.k, std::vector<double>(m.q, 0.0));
    for (size_t j = 1; j <= m.k; ++j) {
        std::vector<double> r = m.has_gram_invsqrt() ? m.gram_invsqrt[j - 1]
                                                     : invsqrt_real(model_gram(m, j), m.q);
        for (size_t i = 0; i < m.q; ++i)
            for (size_t a = 0; a < m.q; ++a)
                feats[j - 1][i] += r[i * m.q + a] * fwd.c(j, seq.length, a);
    }
    return feats;
}

// --- Sequences ---------------------------------------------------------------

inline EncodedSequence encode_sequence(const std::string& text, const std::string& alphabet) {
    EncodedSequence seq;
    seq.length = text.size();
    seq.d = alphabet.size();
    seq.onehot.assign(seq.length * seq.d, 0.0);
    for (size_t t = 0; t < text.size(); ++t) {
        auto pos = alphabet.find(text[t]);
        if (pos == std::string::npos)
            throw UsageError(std::string("unknown character '") + text[t] + "' in sequence");
        seq.onehot[t * seq.d + pos] = 1.0;
    }
    return seq;
}

// Plain text lines: "<id> <sequence>"; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_sequence_lines(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string id, seq;
        if (ls >> id >> seq) out.emplace_back(id, seq);
    }
    return out;
}

// --- Synthetic models ---------------------------------------------------------

// Desk-scale stand-in for externally trained models: random unit anchors,
// moderate lambda and alpha, weights scaled so predictions stay order-one,
// Gram inverse roots from the plaintext eigendecomposition.
inline PlainRknModel make_synthetic_model(size_t q, size_t k, size_t d, u64 seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PlainRknModel m;
    m.q = q;
    m.k = k;
    m.d = d;
    m.lambda = 0.3 + 0.4 * unit(rng);
    m.alpha_sim = 0.3 + 0.5 * unit(rng);
    m.anchors.resize(k * q * d);
    for (size_t l = 0; l < k; ++l)
        for (size_t a = 0; a < q; ++a) {
            double norm = 0;
            for (size_t i = 0; i < d; ++i) {
                double v = normal(rng);
                m.anchors[(l * q + a) * d + i] = v;
                norm += v * v;
            }
            norm = std::sqrt(norm);
            for (size_t i = 0; i < d; ++i) m.anchors[(l * q + a) * d + i] /= norm;
        }
    m.weights.resize(q);
    for (auto& w : m.weights) w = normal(rng) / static_cast<double>(q);
    m.gram_invsqrt.resize(k);
    for (size_t j = 1; j <= k; ++j) m.gram_invsqrt[j - 1] = invsqrt_real(model_gram(m, j), q);
    validate_model(m);
    return m;
}

// --- Model files ---------------------------------------------------------------
//
// Self-describing text: a key/value header, then row-major decimal arrays.
// Values print with max_digits10 so a save/load round trip is bit-exact.

inline void save_model(const PlainRknModel& m, std::ostream& out) {
    out << "rkn-model v1\n";
    out << std::setprecision(17);
    out << "q " << m.q << "\nk " << m.k << "\nd " << m.d << "\n";
    out << "lambda " << m.lambda << "\nalpha " << m.alpha_sim << "\n";
    out << "anchors\n";
    for (size_t l = 0; l < m.k; ++l)
        for (size_t a = 0; a < m.q; ++a) {
            for (size_t i = 0; i < m.d; ++i)
                out << m.anchor(l, a, i) << (i + 1 == m.d ? "" : " ");
            out << "\n";
        }
    out << "weights\n";
    for (size_t i = 0; i < m.q; ++i) out << m.weights[i] << (i + 1 == m.q ? "" : " ");
    out << "\n";
    out << "gram_invsqrt " << (m.has_gram_invsqrt() ? "present" : "absent") << "\n";
    if (m.has_gram_invsqrt())
        for (const auto& g : m.gram_invsqrt)
            for (size_t r = 0; r < m.q; ++r) {
                for (size_t c = 0; c < m.q; ++c)
                    out << g[r * m.q + c] << (c + 1 == m.q ? "" : " ");
                out << "\n";
            }
}

inline void save_model(const PlainRknModel& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open for writing: " + path);
    save_model(m, f);
}

inline PlainRknModel load_model(std::istream& in) {
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "rkn-model" || version != "v1")
        throw UsageError("model file: bad header");
    PlainRknModel m;
    auto expect_key = [&](const char* key) {
        std::string k;
        if (!(in >> k) || k != key) throw UsageError(std::string("model file: expected ") + key);
    };
    expect_key("q");
    in >> m.q;
    expect_key("k");
    in >> m.k;
    expect_key("d");
    in >> m.d;
    expect_key("lambda");
    in >> m.lambda;
    expect_key("alpha");
    in >> m.alpha_sim;
    if (!in || m.q == 0 || m.k == 0 || m.d == 0) throw UsageError("model file: bad dimensions");
    expect_key("anchors");
    m.anchors.resize(m.k * m.q * m.d);
    for (auto& v : m.anchors)
        if (!(in >> v)) throw UsageError("model file: truncated anchors");
    expect_key("weights");
    m.weights.resize(m.q);
    for (auto& v : m.weights)
        if (!(in >> v)) throw UsageError("model file: truncated weights");
    expect_key("gram_invsqrt");
    std::string flag;
    in >> flag;
    if (flag == "present") {
        m.gram_invsqrt.assign(m.k, std::vector<double>(m.q * m.q));
        for (auto& g : m.gram_invsqrt)
            for (auto& v : g)
                if (!(in >> v)) throw UsageError("model file: truncated Gram data");
    } else if (flag != "absent") {
        throw UsageError("model file: bad gram_invsqrt flag");
    }
    validate_model(m);
    return m;
}

inline PlainRknModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open: " + path);
    return load_model(f);
}

} // namespace mpc3
