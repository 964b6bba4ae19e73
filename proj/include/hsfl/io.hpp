#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsfl/batch_opt.hpp"
#include "hsfl/delay.hpp"
#include "hsfl/orchestrator.hpp"

namespace hsfl {

// 12 significant digits; enough that equal doubles print equal and output
// files stay byte-stable across runs.
inline std::string format_g12(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

inline std::string schedule_csv_header()
{
    return "round,scheme,t_fl,t_sl,t_round,K_S,total_batch,u,u_lb,u_ub,cumulative_delay,loss";
}

inline std::string schedule_csv(const std::vector<ScheduleRow>& rows)
{
    std::string s = schedule_csv_header() + "\n";
    for (const auto& r : rows) {
        s += std::to_string(r.round) + "," + r.scheme + "," + format_g12(r.t_fl) + "," +
             format_g12(r.t_sl) + "," + format_g12(r.t_round) + "," +
             std::to_string(r.sl_count) + "," + format_g12(r.total_batch) + "," +
             format_g12(r.u) + "," + format_g12(r.u_lb) + "," + format_g12(r.u_ub) + "," +
             format_g12(r.cumulative_delay) + "," + format_g12(r.loss) + "\n";
    }
    return s;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows)
{
    std::string s = "rho1,rho2_index,rho2,rounds_to_target,cumulative_delay,mean_K_S,"
                    "mean_total_batch\n";
    for (const auto& r : rows) {
        s += format_g12(r.rho1) + "," + std::to_string(r.rho2_index) + "," +
             format_g12(r.rho2) + "," + std::to_string(r.rounds_to_target) + "," +
             format_g12(r.cumulative_delay) + "," + format_g12(r.mean_sl_count) + "," +
             format_g12(r.mean_total_batch) + "\n";
    }
    return s;
}

inline std::string channels_csv(const std::vector<std::pair<int, ChannelDraw>>& draws)
{
    std::string s = "round,device,h_broadcast,h_uplink,h_downlink\n";
    for (const auto& [round, d] : draws) {
        for (int k = 0; k < d.device_count(); ++k) {
            const std::size_t i = static_cast<std::size_t>(k);
            s += std::to_string(round) + "," + std::to_string(k) + "," +
                 format_g12(d.h_broadcast[i]) + "," + format_g12(d.h_uplink[i]) + "," +
                 format_g12(d.h_downlink[i]) + "\n";
        }
    }
    return s;
}

// Per-device delay breakdown rows: device id, component, seconds.
inline std::string round_delays_csv(const RoundDelays& rd, const std::vector<Mode>& modes)
{
    std::string s = "device,component,seconds\n";
    const auto add = [&](int k, const char* comp, double v) {
        s += std::to_string(k) + "," + comp + "," + format_g12(v) + "\n";
    };
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const int id = static_cast<int>(k);
        if (modes[k] == Mode::FL) {
            add(id, "fl_download", rd.fl[k].download);
            add(id, "fl_train", rd.fl[k].train);
            add(id, "fl_upload", rd.fl[k].upload);
        } else {
            add(id, "sl_download", rd.sl[k].download);
            add(id, "sl_compute", rd.sl[k].compute);
            add(id, "sl_communicate", rd.sl[k].communicate);
            add(id, "sl_upload", rd.sl[k].upload);
        }
    }
    return s;
}

inline std::string gibbs_trace_csv(const std::vector<GibbsTraceRow>& rows)
{
    std::string s = "iteration,flipped_device,u_current,u_candidate,accepted\n";
    for (const auto& r : rows) {
        s += std::to_string(r.iteration) + "," + std::to_string(r.flipped_device) + "," +
             format_g12(r.u_current) + "," + format_g12(r.u_candidate) + "," +
             (r.accepted ? "1" : "0") + "\n";
    }
    return s;
}

inline std::string bisection_trace_csv(const std::vector<std::array<double, 3>>& rows,
                                       const std::string& header)
{
    std::string s = header + "\n";
    for (const auto& r : rows)
        s += format_g12(r[0]) + "," + format_g12(r[1]) + "," + format_g12(r[2]) + "\n";
    return s;
}

inline std::string dual_trace_csv(const std::vector<DualTraceRow>& rows)
{
    std::string s = "j,lambda_sum,mu,residual,u2,dual_value\n";
    for (const auto& r : rows) {
        s += std::to_string(r.j) + "," + format_g12(r.lambda_sum) + "," + format_g12(r.mu) +
             "," + format_g12(r.residual) + "," + format_g12(r.u2) + "," +
             format_g12(r.dual_value) + "\n";
    }
    return s;
}

inline nlohmann::json solution_to_json(const RoundSolution& sol, const RoundScenario& scenario,
                                       const ModelProfile& profile, double eps2)
{
    nlohmann::json j;
    std::vector<int> modes;
    for (const Mode m : sol.assignment.modes) modes.push_back(static_cast<int>(m));
    j["modes"] = modes;
    j["cuts"] = sol.assignment.cuts;
    j["bandwidth"] = sol.assignment.bandwidth;
    j["b0"] = sol.assignment.b0;
    j["batches"] = sol.assignment.batches;
    j["u"] = sol.u;
    j["u_lb"] = sol.u_lb;
    j["u_ub"] = sol.u_ub;
    j["t_fl"] = sol.alloc.t_fl;
    j["t_sl"] = sol.alloc.t_sl;
    j["bcd_iterations"] = sol.bcd_iterations;
    j["bcd_converged"] = sol.bcd_converged;
    j["subsolvers_converged"] = sol.subsolvers_converged;
    j["objective_trace"] = sol.objective_trace;
    j["relaxed"] = {{"xi", sol.relaxed_batch.xi},
                    {"tau", sol.relaxed_batch.tau},
                    {"u2", sol.relaxed_batch.u2},
                    {"kkt_residual", sol.relaxed_batch.kkt_residual},
                    {"sl_overshoot", sol.relaxed_batch.sl_overshoot}};
    const ConstraintReport audit = audit_constraints(sol, scenario, profile, eps2);
    j["constraints_ok"] = audit.all_ok();
    return j;
}

}  // namespace hsfl
