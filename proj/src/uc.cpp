#include "gridcep/uc.hpp"

#include <algorithm>
#include <cmath>

namespace gridcep::uc {

using milp::LinExpr;
using milp::Sense;
using milp::VarDomain;
using milp::VarRef;

double candidate_unit_upper_bound(const PowerSystem& system, SiteLimitDomain domain,
                                  const std::string& tech_class, const std::string& bus,
                                  double unit_capacity) {
    double ub = system.config.max_units_default;
    for (const auto& lim : system.site_limits) {
        if (lim.bus != bus || lim.applies_to != domain || !lim.max_capacity) continue;
        if (lim.tech_class != "ALL" && lim.tech_class != tech_class) continue;
        double headroom =
            *lim.max_capacity - existing_capacity_at(system, domain, lim.tech_class, bus);
        ub = std::min(ub, std::max(0.0, headroom) / unit_capacity);
    }
    return ub;
}

double ScenarioSubproblem::ThermalCtx::history(int offset) const {
    if (init_periods > 0) return offset <= init_periods + 1e-9 ? 1.0 : 0.0;
    if (init_periods < 0) return offset <= -init_periods + 1e-9 ? 0.0 : 1.0;
    return 0.0;  // no history: off indefinitely
}

ScenarioSubproblem::ScenarioSubproblem(milp::ModelInstance& model, const PowerSystem& system,
                                       std::vector<const ScenarioDay*> days, int scen_index)
    : model_(model), sys_(system), days_(std::move(days)), scen_(scen_index) {
    if (days_.empty()) throw EngineError("no_scenarios", "subproblem without days");
    tau_ = sys_.config.period_hours;
    ppd_ = sys_.periods_per_day();
    horizon_ = ppd_ * static_cast<int>(days_.size());
    int hours_per_period = static_cast<int>(std::lround(tau_));
    if (std::abs(tau_ - hours_per_period) > 1e-9 || hours_per_period < 1)
        hours_per_period = 1;  // sub-hourly not supported; validated upstream

    auto aggregate = [&](const std::vector<double>& hourly24, int day, int p) {
        double sum = 0.0;
        for (int h = 0; h < hours_per_period; ++h)
            sum += hourly24[static_cast<std::size_t>(p * hours_per_period + h)];
        (void)day;
        return sum / hours_per_period;
    };

    demand_.assign(sys_.buses.size(), std::vector<double>(static_cast<std::size_t>(horizon_), 0.0));
    reserve_req_.assign(static_cast<std::size_t>(horizon_), 0.0);
    for (std::size_t k = 0; k < days_.size(); ++k) {
        const ScenarioDay& day = *days_[k];
        if (day.demand.size() != sys_.buses.size())
            throw EngineError("bad_scenario", day.id + ": demand buses != system buses");
        for (int p = 0; p < ppd_; ++p) {
            int t = static_cast<int>(k) * ppd_ + p;
            for (std::size_t b = 0; b < sys_.buses.size(); ++b)
                demand_[b][static_cast<std::size_t>(t)] =
                    aggregate(day.demand[b], static_cast<int>(k), p);
            reserve_req_[static_cast<std::size_t>(t)] =
                aggregate(day.reserve_req, static_cast<int>(k), p);
        }
    }

    auto periods_of_hours = [&](double hours) {
        return std::max(1, static_cast<int>(std::ceil(hours / tau_ - 1e-9)));
    };

    for (const auto& g : sys_.thermal_generators) {
        ThermalCtx ctx;
        ctx.gen = &g;
        ctx.bus = sys_.bus_index(g.bus);
        if (ctx.bus < 0) throw EngineError("unknown_bus", g.id);
        ctx.dual_fuel = g.secondary_fuel.has_value();
        for (std::size_t f = 0; f < sys_.fuels.size(); ++f) {
            if (sys_.fuels[f].id == g.primary_fuel) ctx.primary_fuel = static_cast<int>(f);
            if (ctx.dual_fuel && sys_.fuels[f].id == *g.secondary_fuel)
                ctx.secondary_fuel = static_cast<int>(f);
        }
        if (ctx.primary_fuel < 0) throw EngineError("unknown_fuel", g.id + " " + g.primary_fuel.str());
        if (ctx.dual_fuel && ctx.secondary_fuel < 0)
            throw EngineError("unknown_fuel", g.id + " " + g.secondary_fuel->str());
        ctx.min_up_p = periods_of_hours(g.min_up);
        ctx.min_down_p = periods_of_hours(g.min_down);
        ctx.init_periods = g.initial_status_hours / tau_;
        for (const auto& cat : g.startup_categories)
            ctx.category_lookback_p.push_back(
                std::max(0, static_cast<int>(std::ceil(cat.min_hours_offline / tau_ - 1e-9))));
        ctx.availability.resize(static_cast<std::size_t>(horizon_));
        for (std::size_t k = 0; k < days_.size(); ++k) {
            const auto& a = days_[k]->availability_for(g.id);
            for (int p = 0; p < ppd_; ++p)
                ctx.availability[static_cast<std::size_t>(k * ppd_ + p)] =
                    aggregate(a, static_cast<int>(k), p);
        }
        for (double a : ctx.availability)
            if (a < 0 || a > 1) throw EngineError("availability_range", g.id);
        thermal_.push_back(std::move(ctx));
    }
    for (const auto& g : sys_.renewable_generators) {
        RenewableCtx ctx;
        ctx.gen = &g;
        ctx.bus = sys_.bus_index(g.bus);
        if (ctx.bus < 0) throw EngineError("unknown_bus", g.id);
        ctx.availability.resize(static_cast<std::size_t>(horizon_));
        for (std::size_t k = 0; k < days_.size(); ++k) {
            const auto& a = days_[k]->availability_for(g.id);
            for (int p = 0; p < ppd_; ++p)
                ctx.availability[static_cast<std::size_t>(k * ppd_ + p)] =
                    aggregate(a, static_cast<int>(k), p);
        }
        renewable_.push_back(std::move(ctx));
    }
    for (const auto& s : sys_.storage_units) {
        StorageCtx ctx;
        ctx.s = &s;
        ctx.bus = sys_.bus_index(s.bus);
        if (ctx.bus < 0) throw EngineError("unknown_bus", s.id);
        ctx.gate_mw = s.existing
                          ? s.power_rating
                          : s.power_rating * candidate_unit_upper_bound(
                                                 sys_, SiteLimitDomain::storage, s.tech_class,
                                                 s.bus, s.power_rating);
        storage_.push_back(ctx);
    }
    for (const auto& l : sys_.lines) {
        if (!l.in_service) continue;
        int fb = sys_.bus_index(l.from_bus);
        int tb = sys_.bus_index(l.to_bus);
        if (fb < 0 || tb < 0) throw EngineError("unknown_bus", l.id);
        if (!sys_.buses[static_cast<std::size_t>(fb)].in_service ||
            !sys_.buses[static_cast<std::size_t>(tb)].in_service)
            throw EngineError("line_out_of_service_bus", l.id);
        lines_.push_back(&l);
    }

    // Pool fuel supplies across the window; any unlimited day makes the
    // pooled supply unlimited.
    fuel_supply_.assign(sys_.fuels.size(), std::optional<double>(0.0));
    for (std::size_t f = 0; f < sys_.fuels.size(); ++f) {
        double total = 0.0;
        bool limited = true;
        for (const auto* day : days_) {
            if (day->fuel_supply.size() != sys_.fuels.size())
                throw EngineError("bad_scenario", day->id + ": fuel supplies != catalog");
            if (!day->fuel_supply[f]) {
                limited = false;
                break;
            }
            total += *day->fuel_supply[f];
        }
        fuel_supply_[f] = limited ? std::optional<double>(total) : std::nullopt;
    }
}

void ScenarioSubproblem::add_variables() {
    if (variables_added_) throw EngineError("double_build", "add_variables called twice");
    variables_added_ = true;
    for (auto& ctx : thermal_) {
        const auto& g = *ctx.gen;
        double cap = g.capacity;
        for (int t = 0; t < horizon_; ++t) {
            double eta = ctx.availability[static_cast<std::size_t>(t)];
            model_.add_variable("u", g.id, t, scen_, VarDomain::binary, 0, 1);
            model_.add_variable("v", g.id, t, scen_, VarDomain::binary, 0, 1);
            model_.add_variable("w", g.id, t, scen_, VarDomain::binary, 0, 1);
            model_.add_variable("p", g.id, t, scen_, VarDomain::continuous, 0, milp::kInf);
            // Headroom capped by available capacity; commitment does not
            // gate it (off units count as quick-start reserve).
            model_.add_variable("pb", g.id, t, scen_, VarDomain::continuous, 0, eta * cap);
            model_.add_variable("csu", g.id, t, scen_, VarDomain::continuous, 0, milp::kInf);
            model_.add_variable("f", g.id, t, scen_, VarDomain::continuous, 0, milp::kInf);
            model_.add_variable("fp", g.id, t, scen_, VarDomain::continuous, 0, milp::kInf);
            model_.add_variable("up", g.id, t, scen_, VarDomain::binary, 0, 1);
            if (ctx.dual_fuel) {
                model_.add_variable("fs", g.id, t, scen_, VarDomain::continuous, 0, milp::kInf);
                model_.add_variable("us", g.id, t, scen_, VarDomain::binary, 0, 1);
            } else {
                model_.add_variable("fs", g.id, t, scen_, VarDomain::continuous, 0, 0);
                model_.add_variable("us", g.id, t, scen_, VarDomain::binary, 0, 0);
            }
            if (!g.existing)
                model_.add_variable("ux", g.id, t, scen_, VarDomain::binary, 0, 1);
        }
        if (g.existing && sys_.config.enforce_utilization) {
            for (std::size_t k = 0; k < days_.size(); ++k)
                model_.add_variable("sigu", g.id, static_cast<int>(k), scen_,
                                    VarDomain::continuous, 0, milp::kInf);
        }
    }
    for (auto& ctx : renewable_) {
        const auto& g = *ctx.gen;
        for (int t = 0; t < horizon_; ++t) {
            double eta = ctx.availability[static_cast<std::size_t>(t)];
            // Existing: output bounded by availability here. Candidates get
            // the eta*P*x cap from the linking constraints instead.
            double hi = g.existing ? eta * g.capacity : milp::kInf;
            model_.add_variable("p", g.id, t, scen_, VarDomain::continuous, 0, hi);
        }
    }
    for (auto& ctx : storage_) {
        const auto& s = *ctx.s;
        double soc_hi = s.existing ? s.duration * s.power_rating : milp::kInf;
        for (int t = 0; t < horizon_; ++t) {
            model_.add_variable("soc", s.id, t, scen_, VarDomain::continuous, 0, soc_hi);
            model_.add_variable("ch", s.id, t, scen_, VarDomain::continuous, 0, ctx.gate_mw);
            model_.add_variable("dis", s.id, t, scen_, VarDomain::continuous, 0, ctx.gate_mw);
            model_.add_variable("e", s.id, t, scen_, VarDomain::binary, 0, 1);
            model_.add_variable("d", s.id, t, scen_, VarDomain::binary, 0, 1);
        }
    }
    for (std::size_t b = 0; b < sys_.buses.size(); ++b) {
        for (int t = 0; t < horizon_; ++t) {
            double d = demand_[b][static_cast<std::size_t>(t)];
            model_.add_variable("sh", sys_.buses[b].id, t, scen_, VarDomain::continuous, 0, d);
        }
    }
    if (sys_.config.network_mode == NetworkMode::pipe_and_bubble) {
        for (const Line* l : lines_)
            for (int t = 0; t < horizon_; ++t)
                model_.add_variable("fl", l->id, t, scen_, VarDomain::continuous,
                                    -l->thermal_limit, l->thermal_limit);
    }
    for (int t = 0; t < horizon_; ++t)
        model_.add_variable("sigr", "", t, scen_, VarDomain::continuous, 0,
                            reserve_req_[static_cast<std::size_t>(t)]);
}

milp::VarRef ScenarioSubproblem::var(const char* family, const std::string& elem, int t) const {
    auto key = model_.lookup_key(family, elem, t, scen_);
    if (!key) throw EngineError("unknown_variable", std::string(family) + "(" + elem + ")");
    return model_.require_variable(*key);
}

void ScenarioSubproblem::build_commitment_constraints() {
    for (auto& ctx : thermal_) {
        const auto& g = *ctx.gen;
        // u_t - u_{t-1} = v_t - w_t with cyclic wrap (u_0 == u_T); starts
        // imply on, stops imply off, so v=w=1 cannot cancel out.
        for (int t = 0; t < horizon_; ++t) {
            int prev = (t + horizon_ - 1) % horizon_;
            LinExpr e;
            e.add(var("u", g.id, t), 1.0);
            e.add(var("u", g.id, prev), -1.0);
            e.add(var("v", g.id, t), -1.0);
            e.add(var("w", g.id, t), 1.0);
            model_.add_constraint("logical", g.id, t, scen_, e, Sense::eq, 0.0);
            LinExpr von;
            von.add(var("v", g.id, t), 1.0).add(var("u", g.id, t), -1.0);
            model_.add_constraint("start_on", g.id, t, scen_, von, Sense::le, 0.0);
            LinExpr woff;
            woff.add(var("w", g.id, t), 1.0).add(var("u", g.id, t), 1.0);
            model_.add_constraint("stop_off", g.id, t, scen_, woff, Sense::le, 1.0);
        }
        if (ctx.min_up_p > horizon_ || ctx.min_down_p > horizon_) {
            // Windows cannot fit in the horizon: status pinned constant.
            warnings_.push_back(g.id + ": min up/down exceeds horizon; status held constant");
            for (int t = 0; t + 1 < horizon_; ++t) {
                LinExpr e;
                e.add(var("u", g.id, t), 1.0);
                e.add(var("u", g.id, t + 1), -1.0);
                model_.add_constraint("status_const", g.id, t, scen_, e, Sense::eq, 0.0);
            }
            continue;
        }
        // Up/down-time windows, clipped at the horizon end; transitions at
        // t=0 are exempt (no cross-day enforcement).
        for (int t = 1; t < horizon_; ++t) {
            for (int tp = t + 1; tp <= std::min(t + ctx.min_up_p - 1, horizon_ - 1); ++tp) {
                LinExpr e;
                e.add(var("u", g.id, t), 1.0);
                e.add(var("u", g.id, t - 1), -1.0);
                e.add(var("u", g.id, tp), -1.0);
                model_.add_constraint("uptime", g.id, t * horizon_ + tp, scen_, e, Sense::le, 0.0);
            }
            for (int tp = t + 1; tp <= std::min(t + ctx.min_down_p - 1, horizon_ - 1); ++tp) {
                LinExpr e;
                e.add(var("u", g.id, t - 1), 1.0);
                e.add(var("u", g.id, t), -1.0);
                e.add(var("u", g.id, tp), 1.0);
                model_.add_constraint("downtime", g.id, t * horizon_ + tp, scen_, e, Sense::le, 1.0);
            }
        }
    }
}

void ScenarioSubproblem::build_dispatch_limits() {
    for (auto& ctx : thermal_) {
        const auto& g = *ctx.gen;
        for (int t = 0; t < horizon_; ++t) {
            double eta = ctx.availability[static_cast<std::size_t>(t)];
            VarRef p = var("p", g.id, t);
            VarRef u = var("u", g.id, t);
            if (g.existing) {
                LinExpr lo;
                lo.add(p, 1.0).add(u, -g.min_power);
                model_.add_constraint("pmin", g.id, t, scen_, lo, Sense::ge, 0.0);
            }
            LinExpr hi;  // candidates also need eta*P*x (linking)
            hi.add(p, 1.0).add(u, -eta * g.capacity);
            model_.add_constraint("pmax", g.id, t, scen_, hi, Sense::le, 0.0);

            LinExpr head;
            head.add(var("pb", g.id, t), 1.0).add(p, -1.0);
            model_.add_constraint("pbar_ge_p", g.id, t, scen_, head, Sense::ge, 0.0);
        }
    }
    // Existing renewable limits live in the variable bounds.
}

void ScenarioSubproblem::build_ramping_constraints() {
    for (auto& ctx : thermal_) {
        const auto& g = *ctx.gen;
        double pmin = g.min_power;
        // Damci-Kurt form; t=0 skipped (no cross-day ramp enforcement).
        for (int t = 1; t < horizon_; ++t) {
            LinExpr up;
            up.add(var("p", g.id, t), 1.0);
            up.add(var("p", g.id, t - 1), -1.0);
            up.add(var("v", g.id, t), -(g.startup_limit - pmin - g.ramp_up * tau_));
            up.add(var("u", g.id, t), -(pmin + g.ramp_up * tau_));
            up.add(var("u", g.id, t - 1), pmin);
            model_.add_constraint("ramp_up", g.id, t, scen_, up, Sense::le, 0.0);

            LinExpr dn;
            dn.add(var("p", g.id, t - 1), 1.0);
            dn.add(var("p", g.id, t), -1.0);
            dn.add(var("w", g.id, t), -(g.shutdown_limit - pmin - g.ramp_down * tau_));
            dn.add(var("u", g.id, t - 1), -(pmin + g.ramp_down * tau_));
            dn.add(var("u", g.id, t), pmin);
            model_.add_constraint("ramp_down", g.id, t, scen_, dn, Sense::le, 0.0);
        }
    }
}

void ScenarioSubproblem::build_startup_costs() {
    for (auto& ctx : thermal_) {
        const auto& g = *ctx.gen;
        for (std::size_t h = 0; h < g.startup_categories.size(); ++h) {
            double cost = g.startup_categories[h].cost;
            int lookback = ctx.category_lookback_p[h];
            for (int t = 0; t < horizon_; ++t) {
                // csu_t >= C_h (u_t - sum_{i=1..Th} u_{t-i}); history before
                // the window start contributes constants.
                LinExpr e;
                e.add(var("csu", g.id, t), 1.0);
                e.add(var("u", g.id, t), -cost);
                double rhs = 0.0;
                for (int i = 1; i <= lookback; ++i) {
                    int j = t - i;
                    if (j >= 0)
                        e.add(var("u", g.id, j), cost);
                    else
                        rhs -= cost * ctx.history(-j);
                }
                model_.add_constraint("startup_cat", g.id,
                                      t * static_cast<int>(g.startup_categories.size() + 1) +
                                          static_cast<int>(h),
                                      scen_, e, Sense::ge, rhs);
            }
        }
    }
}

void ScenarioSubproblem::build_storage_constraints() {
    for (auto& ctx : storage_) {
        const auto& s = *ctx.s;
        for (int t = 0; t < horizon_; ++t) {
            int prev = (t + horizon_ - 1) % horizon_;
            LinExpr gate_ch;
            gate_ch.add(var("ch", s.id, t), 1.0).add(var("e", s.id, t), -ctx.gate_mw);
            model_.add_constraint("charge_gate", s.id, t, scen_, gate_ch, Sense::le, 0.0);
            LinExpr gate_dis;
            gate_dis.add(var("dis", s.id, t), 1.0).add(var("d", s.id, t), -ctx.gate_mw);
            model_.add_constraint("discharge_gate", s.id, t, scen_, gate_dis, Sense::le, 0.0);

            // soc_t = soc_{t-1} + tau (eff+ ch - dis/eff-): cyclic recursion
            // doubles as the end-of-day = start-of-day rule.
            LinExpr dyn;
            dyn.add(var("soc", s.id, t), 1.0);
            dyn.add(var("soc", s.id, prev), -1.0);
            dyn.add(var("ch", s.id, t), -tau_ * s.eff_charge);
            dyn.add(var("dis", s.id, t), tau_ / s.eff_discharge);
            model_.add_constraint("soc_dyn", s.id, t, scen_, dyn, Sense::eq, 0.0);

            LinExpr excl;
            excl.add(var("e", s.id, t), 1.0).add(var("d", s.id, t), 1.0);
            model_.add_constraint("cd_excl", s.id, t, scen_, excl, Sense::le, 1.0);
        }
    }
}

void ScenarioSubproblem::build_network_constraints(NetworkMode mode) {
    if (mode == NetworkMode::pipe_and_bubble) {
        for (std::size_t b = 0; b < sys_.buses.size(); ++b) {
            const std::string& bus_id = sys_.buses[b].id;
            for (int t = 0; t < horizon_; ++t) {
                LinExpr e;
                for (auto& ctx : thermal_)
                    if (ctx.bus == static_cast<int>(b)) e.add(var("p", ctx.gen->id, t), 1.0);
                for (auto& ctx : renewable_)
                    if (ctx.bus == static_cast<int>(b)) e.add(var("p", ctx.gen->id, t), 1.0);
                for (auto& ctx : storage_)
                    if (ctx.bus == static_cast<int>(b)) {
                        e.add(var("dis", ctx.s->id, t), 1.0);
                        e.add(var("ch", ctx.s->id, t), -1.0);
                    }
                for (const Line* l : lines_) {
                    if (sys_.bus_index(l->to_bus) == static_cast<int>(b))
                        e.add(var("fl", l->id, t), 1.0);
                    if (sys_.bus_index(l->from_bus) == static_cast<int>(b))
                        e.add(var("fl", l->id, t), -1.0);
                }
                e.add(var("sh", bus_id, t), 1.0);
                model_.add_constraint("balance", bus_id, t, scen_, e, Sense::eq,
                                      demand_[b][static_cast<std::size_t>(t)]);
            }
        }
    } else {
        for (int t = 0; t < horizon_; ++t) {
            LinExpr e;
            double total_d = 0.0;
            for (auto& ctx : thermal_) e.add(var("p", ctx.gen->id, t), 1.0);
            for (auto& ctx : renewable_) e.add(var("p", ctx.gen->id, t), 1.0);
            for (auto& ctx : storage_) {
                e.add(var("dis", ctx.s->id, t), 1.0);
                e.add(var("ch", ctx.s->id, t), -1.0);
            }
            for (std::size_t b = 0; b < sys_.buses.size(); ++b) {
                e.add(var("sh", sys_.buses[b].id, t), 1.0);
                total_d += demand_[b][static_cast<std::size_t>(t)];
            }
            model_.add_constraint("balance", "system", t, scen_, e, Sense::eq, total_d);
        }
    }
}

void ScenarioSubproblem::build_reserve_constraints() {
    for (int t = 0; t < horizon_; ++t) {
        LinExpr e;
        double total_d = 0.0;
        for (auto& ctx : thermal_) e.add(var("pb", ctx.gen->id, t), 1.0);
        for (auto& ctx : renewable_) e.add(var("p", ctx.gen->id, t), 1.0);
        for (auto& ctx : storage_) {
            e.add(var("dis", ctx.s->id, t), 1.0);
            e.add(var("ch", ctx.s->id, t), -1.0);
        }
        for (std::size_t b = 0; b < sys_.buses.size(); ++b) {
            e.add(var("sh", sys_.buses[b].id, t), 1.0);
            total_d += demand_[b][static_cast<std::size_t>(t)];
        }
        e.add(var("sigr", "", t), 1.0);
        model_.add_constraint("reserve", "", t, scen_, e, Sense::ge,
                              total_d + reserve_req_[static_cast<std::size_t>(t)]);
    }
}

void ScenarioSubproblem::build_fuel_constraints() {
    for (auto& ctx : thermal_) {
        const auto& g = *ctx.gen;
        double fmax = g.heat_rate.max_fuel_rate();
        const auto& bp = g.heat_rate.breakpoints;
        for (int t = 0; t < horizon_; ++t) {
            VarRef f = var("f", g.id, t);
            VarRef fp = var("fp", g.id, t);
            VarRef fs = var("fs", g.id, t);
            VarRef u = var("u", g.id, t);
            VarRef up = var("up", g.id, t);
            VarRef us = var("us", g.id, t);

            // Convex epigraph of the heat-rate curve, gated on commitment.
            // Fuel is costed, so f binds to the max of the cuts at optimum.
            if (bp.size() == 1) {
                LinExpr e;
                e.add(f, 1.0).add(u, -bp[0].fuel_rate);
                model_.add_constraint("fuel_epi", g.id, t, scen_, e, Sense::ge, 0.0);
            } else {
                for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
                    double a = (bp[k + 1].fuel_rate - bp[k].fuel_rate) /
                               (bp[k + 1].power - bp[k].power);
                    double b = bp[k].fuel_rate - a * bp[k].power;
                    LinExpr e;
                    e.add(f, 1.0).add(var("p", g.id, t), -a).add(u, -b);
                    model_.add_constraint("fuel_epi", g.id,
                                          t * static_cast<int>(bp.size()) + static_cast<int>(k),
                                          scen_, e, Sense::ge, 0.0);
                }
            }

            LinExpr split;
            split.add(f, 1.0).add(fp, -1.0).add(fs, -1.0);
            model_.add_constraint("fuel_split", g.id, t, scen_, split, Sense::eq, 0.0);

            LinExpr status;
            status.add(u, 1.0).add(up, -1.0).add(us, -1.0);
            model_.add_constraint("fuel_status", g.id, t, scen_, status, Sense::eq, 0.0);

            LinExpr pcap;
            pcap.add(fp, 1.0).add(up, -fmax);
            model_.add_constraint("fuel_p_cap", g.id, t, scen_, pcap, Sense::le, 0.0);
            if (ctx.dual_fuel) {
                LinExpr scap;
                scap.add(fs, 1.0).add(us, -fmax);
                model_.add_constraint("fuel_s_cap", g.id, t, scen_, scap, Sense::le, 0.0);
            }
        }
    }
    // Pooled supply caps over the window, per fuel.
    for (std::size_t fi = 0; fi < sys_.fuels.size(); ++fi) {
        if (!fuel_supply_[fi]) continue;
        LinExpr e;
        bool any = false;
        for (auto& ctx : thermal_) {
            if (ctx.primary_fuel == static_cast<int>(fi)) {
                for (int t = 0; t < horizon_; ++t) e.add(var("fp", ctx.gen->id, t), tau_);
                any = true;
            }
            if (ctx.dual_fuel && ctx.secondary_fuel == static_cast<int>(fi)) {
                for (int t = 0; t < horizon_; ++t) e.add(var("fs", ctx.gen->id, t), tau_);
                any = true;
            }
        }
        if (!any) continue;
        model_.add_constraint("fuel_supply", sys_.fuels[fi].id.str(), -1, scen_, e, Sense::le,
                              *fuel_supply_[fi]);
    }
}

void ScenarioSubproblem::build_linking_constraints(const FirstStageRefs& fs) {
    for (auto& ctx : thermal_) {
        const auto& g = *ctx.gen;
        if (!g.existing) {
            auto it = fs.thermal_build.find(g.id);
            if (it == fs.thermal_build.end())
                throw EngineError("missing_first_stage", g.id);
            VarRef x = it->second;
            for (int t = 0; t < horizon_; ++t) {
                double eta = ctx.availability[static_cast<std::size_t>(t)];
                LinExpr pc;
                pc.add(var("p", g.id, t), 1.0).add(x, -eta * g.capacity);
                model_.add_constraint("cand_p_cap", g.id, t, scen_, pc, Sense::le, 0.0);
                LinExpr hc;
                hc.add(var("pb", g.id, t), 1.0).add(x, -eta * g.capacity);
                model_.add_constraint("cand_pbar_cap", g.id, t, scen_, hc, Sense::le, 0.0);

                // p >= Pmin * (u and x), with the product lifted via ux and
                // its McCormick envelope.
                VarRef ux = var("ux", g.id, t);
                VarRef u = var("u", g.id, t);
                LinExpr mn;
                mn.add(var("p", g.id, t), 1.0).add(ux, -g.min_power);
                model_.add_constraint("cand_pmin", g.id, t, scen_, mn, Sense::ge, 0.0);
                LinExpr lx;
                lx.add(ux, 1.0).add(x, -1.0);
                model_.add_constraint("ux_le_x", g.id, t, scen_, lx, Sense::le, 0.0);
                LinExpr lu;
                lu.add(ux, 1.0).add(u, -1.0);
                model_.add_constraint("ux_le_u", g.id, t, scen_, lu, Sense::le, 0.0);
                LinExpr ge;
                ge.add(ux, 1.0).add(x, -1.0).add(u, -1.0);
                model_.add_constraint("ux_ge", g.id, t, scen_, ge, Sense::ge, -1.0);
            }
        } else if (g.retirable) {
            auto it = fs.retire.find(g.id);
            if (it == fs.retire.end()) throw EngineError("missing_first_stage", g.id);
            VarRef xr = it->second;
            for (int t = 0; t < horizon_; ++t) {
                LinExpr e;
                e.add(var("u", g.id, t), 1.0).add(xr, 1.0);
                model_.add_constraint("retire_off", g.id, t, scen_, e, Sense::le, 1.0);
            }
        }
        // Minimum utilization with slack, per day window, existing units only.
        if (g.existing && sys_.config.enforce_utilization) {
            for (std::size_t k = 0; k < days_.size(); ++k) {
                LinExpr e;
                for (int p = 0; p < ppd_; ++p)
                    e.add(var("p", g.id, static_cast<int>(k) * ppd_ + p), 1.0);
                e.add(var("sigu", g.id, static_cast<int>(k)), 1.0);
                double target = g.min_utilization * g.capacity * ppd_;
                if (g.retirable) {
                    auto it = fs.retire.find(g.id);
                    if (it == fs.retire.end()) throw EngineError("missing_first_stage", g.id);
                    e.add(it->second, target);
                }
                model_.add_constraint("util", g.id, static_cast<int>(k), scen_, e, Sense::ge,
                                      target);
            }
        }
    }
    for (auto& ctx : renewable_) {
        const auto& g = *ctx.gen;
        if (g.existing) continue;
        auto it = fs.renewable_build.find(g.id);
        if (it == fs.renewable_build.end()) throw EngineError("missing_first_stage", g.id);
        VarRef x = it->second;
        for (int t = 0; t < horizon_; ++t) {
            double eta = ctx.availability[static_cast<std::size_t>(t)];
            LinExpr e;
            e.add(var("p", g.id, t), 1.0).add(x, -eta * g.capacity);
            model_.add_constraint("cand_p_cap", g.id, t, scen_, e, Sense::le, 0.0);
        }
    }
    for (auto& ctx : storage_) {
        const auto& s = *ctx.s;
        if (s.existing) continue;
        auto it = fs.storage_build.find(s.id);
        if (it == fs.storage_build.end()) throw EngineError("missing_first_stage", s.id);
        VarRef x = it->second;
        for (int t = 0; t < horizon_; ++t) {
            LinExpr soc;
            soc.add(var("soc", s.id, t), 1.0).add(x, -s.duration * s.power_rating);
            model_.add_constraint("cand_soc_cap", s.id, t, scen_, soc, Sense::le, 0.0);
            LinExpr ch;
            ch.add(var("ch", s.id, t), 1.0).add(x, -s.power_rating);
            model_.add_constraint("cand_charge_cap", s.id, t, scen_, ch, Sense::le, 0.0);
            LinExpr dis;
            dis.add(var("dis", s.id, t), 1.0).add(x, -s.power_rating);
            model_.add_constraint("cand_discharge_cap", s.id, t, scen_, dis, Sense::le, 0.0);
        }
    }
}

void ScenarioSubproblem::build_operational_objective() {
    production_ = {};
    shed_penalty_ = {};
    reserve_penalty_ = {};
    util_penalty_ = {};
    for (auto& ctx : thermal_) {
        const auto& g = *ctx.gen;
        double price_p = sys_.fuels[static_cast<std::size_t>(ctx.primary_fuel)].price;
        double price_s =
            ctx.dual_fuel ? sys_.fuels[static_cast<std::size_t>(ctx.secondary_fuel)].price : 0.0;
        for (int t = 0; t < horizon_; ++t) {
            production_.add(var("p", g.id, t), g.vom);
            production_.add(var("fp", g.id, t), price_p);
            if (ctx.dual_fuel) production_.add(var("fs", g.id, t), price_s);
            production_.add(var("csu", g.id, t), 1.0);
        }
        if (g.existing && sys_.config.enforce_utilization) {
            for (std::size_t k = 0; k < days_.size(); ++k)
                util_penalty_.add(var("sigu", g.id, static_cast<int>(k)),
                                  sys_.config.util_penalty);
        }
    }
    for (auto& ctx : renewable_) {
        for (int t = 0; t < horizon_; ++t)
            production_.add(var("p", ctx.gen->id, t), ctx.gen->vom);
    }
    for (auto& ctx : storage_) {
        const auto& s = *ctx.s;
        for (int t = 0; t < horizon_; ++t)
            production_.add(var("dis", s.id, t), s.vom + s.discharge_cost);
    }
    for (std::size_t b = 0; b < sys_.buses.size(); ++b)
        for (int t = 0; t < horizon_; ++t)
            shed_penalty_.add(var("sh", sys_.buses[b].id, t), sys_.config.voll);
    for (int t = 0; t < horizon_; ++t)
        reserve_penalty_.add(var("sigr", "", t), sys_.config.reserve_penalty);

    operational_cost_ = {};
    operational_cost_.add(production_).add(shed_penalty_).add(reserve_penalty_).add(util_penalty_);
}

void ScenarioSubproblem::build_all(const FirstStageRefs& fs) {
    add_variables();
    build_commitment_constraints();
    build_dispatch_limits();
    build_ramping_constraints();
    build_startup_costs();
    build_storage_constraints();
    build_network_constraints(sys_.config.network_mode);
    build_reserve_constraints();
    build_fuel_constraints();
    build_linking_constraints(fs);
    build_operational_objective();
}

DispatchSolution ScenarioSubproblem::extract_solution(const milp::SolveResult& result) const {
    DispatchSolution out;
    out.scenario_id = days_.size() == 1 ? days_[0]->id : "stitched";
    out.status = result.status;
    out.result = result;
    if (!result.feasible()) return out;
    const auto& x = result.values;

    out.production_cost = tau_ * production_.value(x);
    out.shed_penalty = tau_ * shed_penalty_.value(x);
    out.reserve_penalty = tau_ * reserve_penalty_.value(x);
    out.util_penalty = tau_ * util_penalty_.value(x);
    out.operational_cost = tau_ * operational_cost_.value(x);

    double min_res = milp::kInf;
    for (int t = 0; t < horizon_; ++t) {
        double shed_t = 0.0;
        double supply = 0.0;
        for (std::size_t b = 0; b < sys_.buses.size(); ++b) {
            double s = result.value(var("sh", sys_.buses[b].id, t));
            shed_t += s;
            supply += s - demand_[b][static_cast<std::size_t>(t)];
        }
        out.load_shed_mwh += tau_ * shed_t;
        if (shed_t > 1e-6) out.lolh += tau_;
        for (const auto& ctx : thermal_) supply += result.value(var("pb", ctx.gen->id, t));
        for (const auto& ctx : renewable_) supply += result.value(var("p", ctx.gen->id, t));
        for (const auto& ctx : storage_)
            supply += result.value(var("dis", ctx.s->id, t)) -
                      result.value(var("ch", ctx.s->id, t));
        min_res = std::min(min_res, supply);
    }
    out.min_reserve_mw = std::max(0.0, min_res);

    for (std::size_t fi = 0; fi < sys_.fuels.size(); ++fi) {
        double used = 0.0;
        bool any = false;
        for (const auto& ctx : thermal_) {
            if (ctx.primary_fuel == static_cast<int>(fi)) {
                any = true;
                for (int t = 0; t < horizon_; ++t)
                    used += tau_ * result.value(var("fp", ctx.gen->id, t));
            }
            if (ctx.dual_fuel && ctx.secondary_fuel == static_cast<int>(fi)) {
                any = true;
                for (int t = 0; t < horizon_; ++t)
                    used += tau_ * result.value(var("fs", ctx.gen->id, t));
            }
        }
        if (any) out.fuel_use[sys_.fuels[fi].id.str()] = used;
    }
    out.rows = dispatch_rows(result);
    return out;
}

std::vector<std::tuple<int, std::string, std::string, double>> ScenarioSubproblem::dispatch_rows(
    const milp::SolveResult& result) const {
    std::vector<std::tuple<int, std::string, std::string, double>> rows;
    if (!result.feasible()) return rows;
    for (int t = 0; t < horizon_; ++t) {
        for (const auto& ctx : thermal_) {
            rows.emplace_back(t, "p", ctx.gen->id, result.value(var("p", ctx.gen->id, t)));
            rows.emplace_back(t, "u", ctx.gen->id, result.value(var("u", ctx.gen->id, t)));
        }
        for (const auto& ctx : renewable_)
            rows.emplace_back(t, "p", ctx.gen->id, result.value(var("p", ctx.gen->id, t)));
        for (const auto& ctx : storage_) {
            rows.emplace_back(t, "soc", ctx.s->id, result.value(var("soc", ctx.s->id, t)));
            rows.emplace_back(t, "charge", ctx.s->id, result.value(var("ch", ctx.s->id, t)));
            rows.emplace_back(t, "discharge", ctx.s->id, result.value(var("dis", ctx.s->id, t)));
        }
        for (const Line* l : lines_)
            if (sys_.config.network_mode == NetworkMode::pipe_and_bubble)
                rows.emplace_back(t, "flow", l->id, result.value(var("fl", l->id, t)));
        for (std::size_t b = 0; b < sys_.buses.size(); ++b)
            rows.emplace_back(t, "shed", sys_.buses[b].id,
                              result.value(var("sh", sys_.buses[b].id, t)));
        rows.emplace_back(t, "reserve_short", "system", result.value(var("sigr", "", t)));
    }
    return rows;
}

FirstStageRefs add_pinned_first_stage(milp::ModelInstance& model, const PowerSystem& system,
                                      const InvestmentPlan& plan) {
    FirstStageRefs fs;
    auto pin = [&](const char* family, const std::string& id, double value) {
        return model.add_variable(family, id, -1, -1, VarDomain::continuous, value, value);
    };
    for (const auto& g : system.thermal_generators) {
        if (!g.existing) {
            int v = 0;
            if (auto it = plan.thermal_builds.find(g.id); it != plan.thermal_builds.end())
                v = it->second;
            fs.thermal_build[g.id] = pin("xg", g.id, static_cast<double>(v));
        } else if (g.retirable) {
            int v = 0;
            if (auto it = plan.retirements.find(g.id); it != plan.retirements.end())
                v = it->second;
            fs.retire[g.id] = pin("xr", g.id, static_cast<double>(v));
        }
    }
    for (const auto& g : system.renewable_generators) {
        if (g.existing) continue;
        double v = 0.0;
        if (auto it = plan.renewable_builds.find(g.id); it != plan.renewable_builds.end())
            v = it->second;
        fs.renewable_build[g.id] = pin("xg", g.id, v);
    }
    for (const auto& s : system.storage_units) {
        if (s.existing) continue;
        double v = 0.0;
        if (auto it = plan.storage_builds.find(s.id); it != plan.storage_builds.end())
            v = it->second;
        fs.storage_build[s.id] = pin("xs", s.id, v);
    }
    return fs;
}

namespace {

DispatchSolution solve_window(const PowerSystem& system, std::vector<const ScenarioDay*> days,
                              const InvestmentPlan& plan, const milp::SolveOptions& options) {
    milp::ModelInstance model;
    FirstStageRefs fs = add_pinned_first_stage(model, system, plan);
    ScenarioSubproblem sub(model, system, std::move(days), 0);
    sub.build_all(fs);
    model.set_objective(sub.operational_cost());
    milp::SolveResult result = milp::solve(model, options);
    if (result.status == milp::SolveStatus::infeasible)
        throw EngineError("infeasible_subproblem",
                          "operational model reported infeasible; shed/reserve slack should make "
                          "this impossible");
    if (result.status == milp::SolveStatus::error)
        throw EngineError("solver_error", result.message);
    return sub.extract_solution(result);
}

}  // namespace

DispatchSolution solve_operational(const PowerSystem& system, const ScenarioDay& scenario,
                                   const InvestmentPlan& plan, const milp::SolveOptions& options) {
    return solve_window(system, {&scenario}, plan, options);
}

DispatchSolution solve_operational_stitched(const PowerSystem& system,
                                            const std::vector<ScenarioDay>& days,
                                            const InvestmentPlan& plan,
                                            const milp::SolveOptions& options) {
    std::vector<const ScenarioDay*> ptrs;
    ptrs.reserve(days.size());
    for (const auto& d : days) ptrs.push_back(&d);
    return solve_window(system, std::move(ptrs), plan, options);
}

}  // namespace gridcep::uc
