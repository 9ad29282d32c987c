#include <chrono>
#include <cmath>

#include "Highs.h"
#include "gridcep/milp.hpp"

namespace gridcep::milp {

namespace {

SolveStatus map_status(HighsModelStatus st, bool has_solution) {
    switch (st) {
        case HighsModelStatus::kOptimal: return SolveStatus::optimal;
        case HighsModelStatus::kInfeasible: return SolveStatus::infeasible;
        case HighsModelStatus::kUnbounded: return SolveStatus::unbounded;
        case HighsModelStatus::kUnboundedOrInfeasible: return SolveStatus::infeasible;
        case HighsModelStatus::kTimeLimit:
            return has_solution ? SolveStatus::time_limit : SolveStatus::error;
        case HighsModelStatus::kIterationLimit:
            return has_solution ? SolveStatus::time_limit : SolveStatus::error;
        default: return SolveStatus::error;
    }
}

}  // namespace

SolveResult solve(const ModelInstance& model, const SolveOptions& options) {
    SolveResult result;
    auto t0 = std::chrono::steady_clock::now();
    try {
        if (model.num_variables() == 0) {
            result.status = SolveStatus::error;
            result.message = "empty model";
            return result;
        }

        const auto& vars = model.variables();
        const auto& cons = model.constraints();

        HighsModel hm;
        HighsLp& lp = hm.lp_;
        lp.num_col_ = static_cast<HighsInt>(vars.size());
        lp.num_row_ = static_cast<HighsInt>(cons.size());
        lp.sense_ = ObjSense::kMinimize;
        lp.offset_ = model.objective_constant();

        lp.col_cost_.assign(vars.size(), 0.0);
        for (auto& [i, c] : model.objective_terms()) lp.col_cost_[static_cast<std::size_t>(i)] = c;

        lp.col_lower_.resize(vars.size());
        lp.col_upper_.resize(vars.size());
        bool any_integer = false;
        lp.integrality_.assign(vars.size(), HighsVarType::kContinuous);
        for (std::size_t i = 0; i < vars.size(); ++i) {
            lp.col_lower_[i] = vars[i].lo;
            lp.col_upper_[i] = vars[i].hi;
            if (vars[i].domain == VarDomain::binary) {
                lp.integrality_[i] = HighsVarType::kInteger;
                any_integer = true;
            }
        }
        if (!any_integer) lp.integrality_.clear();

        lp.row_lower_.resize(cons.size());
        lp.row_upper_.resize(cons.size());
        std::size_t nnz = 0;
        for (const auto& c : cons) nnz += c.terms.size();
        lp.a_matrix_.format_ = MatrixFormat::kRowwise;
        lp.a_matrix_.start_.clear();
        lp.a_matrix_.start_.reserve(cons.size() + 1);
        lp.a_matrix_.index_.reserve(nnz);
        lp.a_matrix_.value_.reserve(nnz);
        lp.a_matrix_.start_.push_back(0);
        for (std::size_t r = 0; r < cons.size(); ++r) {
            const auto& c = cons[r];
            switch (c.sense) {
                case Sense::le: lp.row_lower_[r] = -kInf; lp.row_upper_[r] = c.rhs; break;
                case Sense::ge: lp.row_lower_[r] = c.rhs; lp.row_upper_[r] = kInf; break;
                case Sense::eq: lp.row_lower_[r] = c.rhs; lp.row_upper_[r] = c.rhs; break;
            }
            for (auto& [i, v] : c.terms) {
                lp.a_matrix_.index_.push_back(static_cast<HighsInt>(i));
                lp.a_matrix_.value_.push_back(v);
            }
            lp.a_matrix_.start_.push_back(static_cast<HighsInt>(lp.a_matrix_.index_.size()));
        }

        Highs highs;
        highs.setOptionValue("output_flag", options.log);
        highs.setOptionValue("mip_rel_gap", options.mip_gap);
        highs.setOptionValue("threads", options.threads);
        highs.setOptionValue("random_seed", options.seed);
        if (options.time_limit) highs.setOptionValue("time_limit", *options.time_limit);

        if (highs.passModel(hm) != HighsStatus::kOk) {
            result.status = SolveStatus::error;
            result.message = "backend rejected model";
            return result;
        }
        HighsStatus run = highs.run();
        auto t1 = std::chrono::steady_clock::now();
        result.wall_time = std::chrono::duration<double>(t1 - t0).count();
        if (run == HighsStatus::kError) {
            result.status = SolveStatus::error;
            result.message = "backend run() failed";
            return result;
        }

        const HighsInfo& info = highs.getInfo();
        bool has_solution = info.primal_solution_status == kSolutionStatusFeasible;
        result.status = map_status(highs.getModelStatus(), has_solution);
        if (result.feasible()) {
            result.objective = info.objective_function_value;
            if (any_integer) {
                result.best_bound = info.mip_dual_bound;
                // HiGHS reports kOptimal whenever the relative gap closes below
                // mip_rel_gap; distinguish a true optimum from a gap-limit stop.
                if (result.status == SolveStatus::optimal && info.mip_gap > 1e-9)
                    result.status = SolveStatus::gap_limit;
            } else {
                result.best_bound = result.objective;
            }
            result.values.resize(vars.size());
            const std::vector<double>& col = highs.getSolution().col_value;
            for (std::size_t i = 0; i < vars.size(); ++i) result.values[i] = col[i];
        } else if (result.status == SolveStatus::error) {
            result.message = "backend status: " + highs.modelStatusToString(highs.getModelStatus());
        }
        return result;
    } catch (const std::exception& e) {
        result.status = SolveStatus::error;
        result.message = e.what();
        return result;
    }
}

}  // namespace gridcep::milp
