#ifndef DYS_MODEL_EVALUATE_HPP
#define DYS_MODEL_EVALUATE_HPP

#include <vector>

#include "dys/metrics.hpp"
#include "dys/model/model.hpp"

namespace dys::model {

/// Time-dependent AUC of a fitted model on `test`, with the censoring
/// distribution taken from `train`. RPS models are scored with 1 - S(t | x);
/// Cox models with their time-constant risk.
inline metrics::AucReport evaluate_auc(const DySModel& m, const data::SurvivalDataset& train,
                                       const data::SurvivalDataset& test)
{
    const auto idx = metrics::evaluation_indices(m.grid, test);
    const Matrix full = risk_matrix(m, test.x, m.grid.size());
    Matrix risk(full.rows(), static_cast<Eigen::Index>(idx.size()));
    std::vector<double> times;
    for (std::size_t c = 0; c < idx.size(); ++c) {
        risk.col(static_cast<Eigen::Index>(c)) = full.col(static_cast<Eigen::Index>(idx[c]));
        times.push_back(m.grid.times[idx[c]]);
    }
    return metrics::cumulative_dynamic_auc(train, test, risk, times);
}

} // namespace dys::model

#endif // DYS_MODEL_EVALUATE_HPP
