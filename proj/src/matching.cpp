#include "pmiris/matching.hpp"

#include "pmiris/error.hpp"

#include <bit>
#include <cmath>

namespace pmiris {

namespace {

using Word = std::uint64_t;

int wrap(int c, int n) {
    const int m = c % n;
    return m < 0 ? m + n : m;
}

// Rows packed LSB-first: bit i of word w is column 64*w + i.
class PackedPlane {
public:
    PackedPlane(const Bitmap& b, bool doubled) : cols_(b.cols()) {
        const int bits = doubled ? 2 * cols_ : cols_;
        words_ = (bits + 63) / 64 + 1;
        data_.assign(static_cast<std::size_t>(b.rows()) * words_, 0);
        for (int r = 0; r < b.rows(); ++r) {
            Word* row = &data_[static_cast<std::size_t>(r) * words_];
            for (int j = 0; j < bits; ++j) {
                if (b.at(r, j % cols_)) row[j / 64] |= Word{1} << (j % 64);
            }
        }
    }

    const Word* row(int r) const { return &data_[static_cast<std::size_t>(r) * words_]; }

private:
    int cols_;
    int words_;
    std::vector<Word> data_;
};

// cols bits starting at bit `offset` of a doubled row.
void extract(const Word* src, int offset, int out_words, Word tail_mask, Word* out) {
    for (int j = 0; j < out_words; ++j) {
        const int pos = offset + 64 * j;
        const int w = pos / 64, sh = pos % 64;
        out[j] = sh ? (src[w] >> sh) | (src[w + 1] << (64 - sh)) : src[w];
    }
    out[out_words - 1] &= tail_mask;
}

}  // namespace

bool compatible(const IrisTemplate& a, const IrisTemplate& b) {
    return a.encoder_id == b.encoder_id && a.params_digest == b.params_digest && a.rows == b.rows &&
           a.cols == b.cols && a.bitplanes.size() == b.bitplanes.size();
}

MatchResult fractional_hamming(const IrisTemplate& a, const IrisTemplate& b, int max_shift, double overlap_floor) {
    if (max_shift < 0) throw Error(ErrorCode::InvalidArgument, "max_shift must be >= 0");
    a.validate();
    b.validate();
    if (!compatible(a, b)) throw Error(ErrorCode::IncompatibleTemplates, "encoder, params or dimensions differ");

    const int rows = a.rows, cols = a.cols;
    const int words = (cols + 63) / 64;
    const Word tail = cols % 64 ? (Word{1} << (cols % 64)) - 1 : ~Word{0};
    const auto planes = a.bitplanes.size();

    std::vector<PackedPlane> pa, pb;
    for (std::size_t p = 0; p < planes; ++p) {
        pa.emplace_back(a.bitplanes[p], false);
        pb.emplace_back(b.bitplanes[p], true);
    }
    const PackedPlane ma(a.mask, false), mb(b.mask, true);

    const double grid = static_cast<double>(rows) * cols;
    MatchResult res;
    res.per_shift_scores.assign(static_cast<std::size_t>(2 * max_shift + 1), std::nullopt);
    bool found = false;

    std::vector<Word> joint(static_cast<std::size_t>(words)), code(static_cast<std::size_t>(words));
    // 0, -1, +1, -2, +2, ...: the first strict minimum wins the tie-break.
    for (int step = 0; step <= 2 * max_shift; ++step) {
        const int s = step == 0 ? 0 : (step % 2 ? -(step + 1) / 2 : step / 2);
        const int offset = wrap(-s, cols);
        std::int64_t overlap = 0, disagree = 0;
        for (int r = 0; r < rows; ++r) {
            extract(mb.row(r), offset, words, tail, joint.data());
            const Word* am = ma.row(r);
            for (int j = 0; j < words; ++j) {
                joint[static_cast<std::size_t>(j)] &= am[j];
                overlap += std::popcount(joint[static_cast<std::size_t>(j)]);
            }
            for (std::size_t p = 0; p < planes; ++p) {
                extract(pb[p].row(r), offset, words, tail, code.data());
                const Word* ac = pa[p].row(r);
                for (int j = 0; j < words; ++j) {
                    disagree += std::popcount((ac[j] ^ code[static_cast<std::size_t>(j)]) & joint[static_cast<std::size_t>(j)]);
                }
            }
        }
        if (overlap == 0 || static_cast<double>(overlap) / grid < overlap_floor) continue;
        const double hd = static_cast<double>(disagree) / (static_cast<double>(planes) * static_cast<double>(overlap));
        res.per_shift_scores[static_cast<std::size_t>(s + max_shift)] = hd;
        if (!found || hd < res.score) {
            res.score = hd;
            res.best_shift = s;
            res.overlap_bits = overlap;
            found = true;
        }
    }
    if (!found) throw Error(ErrorCode::InsufficientOverlap, "joint mask below overlap floor at every shift");
    return res;
}

double Heatmap::mean() const {
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (present.data()[i]) {
            sum += values[i];
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

Heatmap similarity_heatmap(const IrisTemplate& a, const IrisTemplate& b, int shift) {
    a.validate();
    b.validate();
    if (!compatible(a, b)) throw Error(ErrorCode::IncompatibleTemplates, "encoder, params or dimensions differ");
    const int rows = a.rows, cols = a.cols;
    const double planes = static_cast<double>(a.bitplanes.size());

    Bitmap joint(rows, cols);
    std::vector<double> agree(static_cast<std::size_t>(rows) * cols, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int cb = wrap(c - shift, cols);
            if (!a.mask.at(r, c) || !b.mask.at(r, cb)) continue;
            joint.set(r, c, true);
            int same = 0;
            for (std::size_t p = 0; p < a.bitplanes.size(); ++p) same += a.bitplanes[p].at(r, c) == b.bitplanes[p].at(r, cb);
            agree[static_cast<std::size_t>(r) * cols + c] = same / planes;
        }
    }

    Heatmap h;
    h.rows = rows;
    h.cols = cols;
    h.values.assign(agree.size(), 0.0);
    h.present = joint;
    constexpr int half = kHeatmapWindow / 2;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (!joint.at(r, c)) continue;
            double sum = 0;
            int n = 0;
            for (int dr = -half; dr <= half; ++dr) {
                const int rr = r + dr;
                if (rr < 0 || rr >= rows) continue;
                for (int dc = -half; dc <= half; ++dc) {
                    const int cc = wrap(c + dc, cols);
                    if (!joint.at(rr, cc)) continue;
                    sum += agree[static_cast<std::size_t>(rr) * cols + cc];
                    ++n;
                }
            }
            h.values[static_cast<std::size_t>(r) * cols + c] = sum / n;
        }
    }
    return h;
}

std::vector<std::uint8_t> heatmap_gray(const Heatmap& h) {
    std::vector<std::uint8_t> out(h.values.size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (h.present.data()[i]) out[i] = static_cast<std::uint8_t>(std::lround(255.0 * h.values[i]));
    }
    return out;
}

}  // namespace pmiris
