#pragma once

#include <Eigen/Dense>
#include <deque>

namespace helfrich {

/// Two-loop L-BFGS direction from a short history of (step, gradient change)
/// pairs. Callers own the outer loop, line search and any reprojection.
class LbfgsMemory {
  public:
    explicit LbfgsMemory(int history = 10) : history_(history) {}

    void clear() { pairs_.clear(); }

    void push(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
        double sy = s.dot(y);
        if (sy <= 1e-14 * s.norm() * y.norm()) return;  // curvature guard
        pairs_.push_back({s, y, sy});
        if (static_cast<int>(pairs_.size()) > history_) pairs_.pop_front();
    }

    /// Returns the descent direction -H g.
    Eigen::VectorXd direction(const Eigen::VectorXd& g) const {
        Eigen::VectorXd q = g;
        std::deque<double> alpha;
        for (auto it = pairs_.rbegin(); it != pairs_.rend(); ++it) {
            double a = it->s.dot(q) / it->sy;
            alpha.push_front(a);
            q -= a * it->y;
        }
        if (!pairs_.empty()) {
            const auto& last = pairs_.back();
            q *= last.sy / last.y.squaredNorm();
        }
        std::size_t i = 0;
        for (auto it = pairs_.begin(); it != pairs_.end(); ++it, ++i) {
            double b = it->y.dot(q) / it->sy;
            q += (alpha[i] - b) * it->s;
        }
        return -q;
    }

    bool empty() const { return pairs_.empty(); }

  private:
    struct Pair {
        Eigen::VectorXd s, y;
        double sy;
    };
    int history_;
    std::deque<Pair> pairs_;
};

}  // namespace helfrich
