#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace respo {

// Tile coding over a box: `tilings` shifted uniform grids, each contributing
// one active feature per input. Inputs are clamped to the box, so the coder is
// total on R^d.
class TileCoder {
public:
    TileCoder() = default;
    TileCoder(std::vector<double> lo, std::vector<double> hi, std::vector<int> cells, int tilings)
        : lo_(std::move(lo)), hi_(std::move(hi)), cells_(std::move(cells)), tilings_(tilings) {
        if (lo_.size() != hi_.size() || lo_.size() != cells_.size())
            throw std::invalid_argument("TileCoder: dimension mismatch");
        if (tilings_ < 1) throw std::invalid_argument("TileCoder: need at least one tiling");
        dims_ = static_cast<int>(lo_.size());
        per_tiling_ = 1;
        for (int d = 0; d < dims_; ++d) {
            if (cells_[d] < 1 || !(hi_[d] > lo_[d])) throw std::invalid_argument("TileCoder: bad grid axis");
            per_tiling_ *= cells_[d];
        }
    }

    int dims() const { return dims_; }
    int tilings() const { return tilings_; }
    int n_features() const { return per_tiling_ * tilings_; }

    // Writes `tilings` active feature indices for the input point.
    void active(const double* x, int* out) const {
        for (int t = 0; t < tilings_; ++t) {
            int idx = 0;
            for (int d = 0; d < dims_; ++d) {
                double width = (hi_[d] - lo_[d]) / cells_[d];
                double shift = width * static_cast<double>(t) / tilings_;
                double v = std::min(std::max(x[d], lo_[d]), hi_[d]);
                int cell = static_cast<int>(std::floor((v - lo_[d] + shift) / width));
                cell = std::min(std::max(cell, 0), cells_[d] - 1);
                idx = idx * cells_[d] + cell;
            }
            out[t] = t * per_tiling_ + idx;
        }
    }

    std::vector<int> active(const std::vector<double>& x) const {
        std::vector<int> out(tilings_);
        active(x.data(), out.data());
        return out;
    }

private:
    std::vector<double> lo_, hi_;
    std::vector<int> cells_;
    int tilings_ = 1;
    int dims_ = 0;
    long per_tiling_ = 0;
};

}  // namespace respo
