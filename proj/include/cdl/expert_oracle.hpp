// Expert regret minimization oracle: multi-scale multiplicative weights over
// 2m sign experts plus an auxiliary expert whose gain is always zero. Each
// expert (i, sigma) is cloned once per learning rate eta_k = 2^-k; a clone's
// weight follows w <- w * exp(eta*l - eta^2*l^2), and the emitted mass of an
// expert is the eta-weighted sum of its clones' normalized weights. With the
// geometric eta grid this yields per-expert regret that scales with the
// expert's own activity, ~ sqrt(n_i log(mT)).
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cdl {

class ExpertOracle {
  public:
    // Expert (i, sigma) with i in 1..m and sigma in {+1,-1} lives at flat
    // index 2*(i-1) + (sigma < 0).
    static std::size_t expert_index(int bucket, int sign) {
        return 2 * static_cast<std::size_t>(bucket - 1) + (sign < 0 ? 1 : 0);
    }

    ExpertOracle(int m, long horizon) : m_(m), horizon_(horizon) {
        if (m < 2 || horizon < 2)
            throw std::invalid_argument("expert oracle requires m >= 2 and T >= 2");
        double log_mt = std::log(static_cast<double>(m) * static_cast<double>(horizon));
        int k_max = static_cast<int>(std::ceil(
                        std::log2(std::sqrt(static_cast<double>(horizon) / log_mt)))) + 1;
        num_scales_ = k_max < 1 ? 1 : k_max;
        eta_.resize(num_scales_);
        for (int k = 0; k < num_scales_; ++k) eta_[k] = std::pow(2.0, -(k + 1));

        const std::size_t clones = 2 * static_cast<std::size_t>(m_) * num_scales_;
        log_prior_aux_ = std::log(0.5);
        double log_prior_clone = std::log(0.5 / static_cast<double>(clones));
        logw_.assign(clones, log_prior_clone);
        cum_gain_.assign(2 * static_cast<std::size_t>(m_), 0.0);
        active_rounds_.assign(2 * static_cast<std::size_t>(m_), 0);
    }

    int num_experts() const { return 2 * m_; }
    int num_scales() const { return num_scales_; }
    double scale(int k) const { return eta_[k]; }
    long round() const { return t_; }
    long horizon() const { return horizon_; }

    // Emitted masses w_{t,i,sigma}; total <= 1/2 < 1 since every eta <= 1/2.
    std::vector<double> weights() const {
        double log_z = log_normalizer();
        std::vector<double> w(2 * static_cast<std::size_t>(m_), 0.0);
        for (std::size_t e = 0; e < w.size(); ++e)
            for (int k = 0; k < num_scales_; ++k)
                w[e] += eta_[k] * std::exp(logw_[clone_index(e, k)] - log_z);
        return w;
    }

    // gains[e] in [-1,1], indexed by expert_index.
    void update(const std::vector<double>& gains) {
        if (t_ >= horizon_) throw std::runtime_error("expert oracle: horizon exhausted");
        if (gains.size() != static_cast<std::size_t>(2 * m_))
            throw std::invalid_argument("expert oracle: gain vector has wrong size");
        for (double l : gains)
            if (!(l >= -1.0 && l <= 1.0))
                throw std::invalid_argument("expert oracle: gain outside [-1,1]");

        std::vector<double> w = weights();
        for (std::size_t e = 0; e < w.size(); ++e) cum_weighted_gain_ += w[e] * gains[e];

        for (std::size_t e = 0; e < gains.size(); ++e) {
            double l = gains[e];
            cum_gain_[e] += l;
            if (l != 0.0) {
                ++active_rounds_[e];
                for (int k = 0; k < num_scales_; ++k)
                    logw_[clone_index(e, k)] += eta_[k] * l - eta_[k] * eta_[k] * l * l;
            }
        }
        ++t_;
    }

    struct Audit {
        std::vector<double> regret;        // per expert: sum l_e - sum weighted gain
        std::vector<long> active_rounds;   // rounds with nonzero gain per expert
        double aux_regret = 0.0;           // 0 - sum weighted gain
        double weighted_gain_total = 0.0;
    };

    Audit regret_audit() const {
        Audit a;
        a.weighted_gain_total = cum_weighted_gain_;
        a.aux_regret = -cum_weighted_gain_;
        a.active_rounds = active_rounds_;
        a.regret.resize(cum_gain_.size());
        for (std::size_t e = 0; e < cum_gain_.size(); ++e)
            a.regret[e] = cum_gain_[e] - cum_weighted_gain_;
        return a;
    }

  private:
    std::size_t clone_index(std::size_t expert, int k) const {
        return expert * static_cast<std::size_t>(num_scales_) + static_cast<std::size_t>(k);
    }

    double log_normalizer() const {
        double hi = log_prior_aux_;
        for (double lw : logw_) hi = std::max(hi, lw);
        double sum = std::exp(log_prior_aux_ - hi);
        for (double lw : logw_) sum += std::exp(lw - hi);
        return hi + std::log(sum);
    }

    int m_;
    long horizon_;
    int num_scales_;
    std::vector<double> eta_;
    std::vector<double> logw_;
    double log_prior_aux_;
    std::vector<double> cum_gain_;
    std::vector<long> active_rounds_;
    double cum_weighted_gain_ = 0.0;
    long t_ = 0;
};

}  // namespace cdl
