#pragma once

// Command-line front end logic, kept out of main() so the tests can drive it.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cutstokes/cutstokes.hpp"

namespace cutstokes::app {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline const std::vector<std::string> commands = { "single",       "convergence", "gamma-sweep",
                                                   "geometry-sweep", "assumptions", "freefall" };

inline std::vector<double> default_gamma_grid()
{
    return { 1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1, 2e-1 };
}

struct run_config
{
    std::string         command = "single";
    std::string         triplet = "p2p1p0";
    int                 n = 40;
    std::vector<int>    n_list{ 10, 20, 40, 80, 160 };
    double              gamma0 = 0.05;
    std::vector<double> gamma_list = default_gamma_grid();
    double              xc = 0.5, yc = 0.5, radius = 0.21;
    double              nu = 1.0;
    bool                vtk = false;
    bool                condition = false;

    double xc_from = 0.5, xc_to = 0.7, xc_step = 0.005;

    // free fall; the ball starts at (xc, h2_start)
    double dt = 1e-3, mass = 0.02, t_end = 0.1, h2_start = 0.75, gravity = standard_gravity;
    int    alpha_every = 1, snapshot_every = 0;

    case_config case_cfg() const
    {
        case_config c;
        c.triplet = parse_triplet(triplet);
        c.n = n;
        c.gamma0 = gamma0;
        c.center = { xc, yc };
        c.radius = radius;
        c.nu = nu;
        c.estimate_condition = condition;
        return c;
    }

    freefall_config fall_cfg() const
    {
        freefall_config f;
        f.drag.n = n;
        f.drag.triplet = parse_triplet(triplet);
        f.drag.gamma0 = gamma0;
        f.drag.nu = nu;
        f.drag.radius = radius;
        f.mass = mass;
        f.gravity = gravity;
        f.dt = dt;
        f.t_end = t_end;
        f.xc = xc;
        f.h2_start = h2_start;
        f.alpha_every = alpha_every;
        f.snapshot_every = snapshot_every;
        return f;
    }

    /// Throws std::invalid_argument before any computation.
    void validate() const
    {
        if (std::find(commands.begin(), commands.end(), command) == commands.end())
            throw std::invalid_argument("unknown command '" + command + "'");
        case_cfg().validate();
        if (command == "convergence" || command == "assumptions")
        {
            if (n_list.empty())
                throw std::invalid_argument("n-list must not be empty");
            for (int k : n_list)
                if (k < 2)
                    throw std::invalid_argument("n must be at least 2");
            if (command == "convergence" && n_list.size() < 3)
                throw std::invalid_argument("convergence needs at least three mesh levels");
        }
        if (command == "gamma-sweep")
            for (double g : gamma_list)
                if (!(g > 0.0))
                    throw std::invalid_argument("gamma-sweep values must be positive");
        if (command == "geometry-sweep")
        {
            arithmetic_grid(xc_from, xc_to, xc_step);
            case_config c = case_cfg();
            for (double x : { xc_from, xc_to })
            {
                c.center.x() = x;
                c.validate();
            }
        }
        if (command == "freefall")
            fall_cfg().validate();
    }
};

inline json to_json(const run_config& c)
{
    return json{ { "command", c.command },     { "triplet", c.triplet },
                 { "n", c.n },                 { "n_list", c.n_list },
                 { "gamma0", c.gamma0 },       { "gamma_list", c.gamma_list },
                 { "xc", c.xc },               { "yc", c.yc },
                 { "radius", c.radius },       { "nu", c.nu },
                 { "vtk", c.vtk },             { "condition", c.condition },
                 { "xc_from", c.xc_from },
                 { "xc_to", c.xc_to },         { "xc_step", c.xc_step },
                 { "dt", c.dt },               { "mass", c.mass },
                 { "t_end", c.t_end },         { "h2_start", c.h2_start },
                 { "gravity", c.gravity },     { "alpha_every", c.alpha_every },
                 { "snapshot_every", c.snapshot_every } };
}

inline run_config from_json(const json& j)
{
    run_config c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key))
            j.at(key).get_to(field);
    };
    get("command", c.command);
    get("triplet", c.triplet);
    get("n", c.n);
    get("n_list", c.n_list);
    get("gamma0", c.gamma0);
    get("gamma_list", c.gamma_list);
    get("xc", c.xc);
    get("yc", c.yc);
    get("radius", c.radius);
    get("nu", c.nu);
    get("vtk", c.vtk);
    get("condition", c.condition);
    get("xc_from", c.xc_from);
    get("xc_to", c.xc_to);
    get("xc_step", c.xc_step);
    get("dt", c.dt);
    get("mass", c.mass);
    get("t_end", c.t_end);
    get("h2_start", c.h2_start);
    get("gravity", c.gravity);
    get("alpha_every", c.alpha_every);
    get("snapshot_every", c.snapshot_every);
    return c;
}

/// FNV-1a over the canonical JSON dump.
inline std::string config_hash(const run_config& c)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : to_json(c).dump())
    {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str().substr(0, 10);
}

inline fs::path output_root()
{
    const char* env = std::getenv("CUTSTOKES_OUTPUT_ROOT");
    return env && *env ? fs::path(env) : fs::path("runs");
}

/// <root>/<command>-<YYYYmmdd-HHMMSS>-<hash>, suffixed if it already exists.
inline fs::path fresh_run_dir(const run_config& c)
{
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    localtime_r(&t, &tm);
    std::ostringstream stamp;
    stamp << std::put_time(&tm, "%Y%m%d-%H%M%S");
    fs::path base = output_root() / (c.command + "-" + stamp.str() + "-" + config_hash(c));
    fs::path p = base;
    for (int k = 1; fs::exists(p); k++)
        p = base.string() + "-" + std::to_string(k);
    return p;
}

inline void write_manifest(const fs::path& dir, const run_config& c)
{
    json m{ { "config", to_json(c) }, { "config_hash", config_hash(c) } };
    std::ofstream os(dir / "manifest.json");
    os << m.dump(2) << "\n";
}

inline run_config read_manifest(const fs::path& file)
{
    std::ifstream is(file);
    if (!is)
        throw std::invalid_argument("cannot read manifest " + file.string());
    json m = json::parse(is);
    return from_json(m.contains("config") ? m.at("config") : m);
}

inline std::ofstream open_csv(const fs::path& p)
{
    std::ofstream os(p);
    if (!os)
        throw std::runtime_error("cannot write " + p.string());
    return os;
}

inline void run_single(const run_config& c, const fs::path& dir, std::ostream& log)
{
    auto r = run_case_full(c.case_cfg());
    print_dof_report(log, r.disc.layout);
    print_csv_header(log);
    print_csv_row(log, r.solution.report);

    auto os = open_csv(dir / "errors.csv");
    write_report_header(os);
    write_report_row(os, r.report);
    write_report_header(log);
    write_report_row(log, r.report);

    if (c.vtk && r.report.ok())
    {
        write_solution_vtk((dir / "solution.vtk").string(), r.disc, r.solution.fields.U, r.solution.fields.P);
        write_interface_vtk((dir / "interface.vtk").string(), r.disc);
    }
    if (!r.report.ok())
        throw solver_error(r.report.status);
}

inline void write_orders(std::ostream& os, const convergence_table& t)
{
    os << "quantity,order\n"
       << "err_u_l2," << format_number(t.order_u_l2) << "\n"
       << "err_u_h1," << format_number(t.order_u_h1) << "\n"
       << "err_p_l2," << format_number(t.order_p_l2) << "\n"
       << "err_lambda_l2," << format_number(t.order_lambda_l2) << "\n";
}

inline void run_convergence(const run_config& c, const fs::path& dir, std::ostream& log)
{
    auto t = convergence_study(c.case_cfg(), c.n_list);
    auto os = open_csv(dir / "convergence.csv");
    write_report_header(os);
    write_report_header(log);
    for (const auto& r : t.rows)
    {
        write_report_row(os, r);
        write_report_row(log, r);
    }
    auto oo = open_csv(dir / "orders.csv");
    write_orders(oo, t);
    write_orders(log, t);
}

inline void run_gamma_sweep(const run_config& c, const fs::path& dir, std::ostream& log)
{
    auto rows = gamma_sweep(c.case_cfg(), c.gamma_list);
    auto os = open_csv(dir / "gamma_sweep.csv");
    write_report_header(os);
    write_report_header(log);
    for (const auto& r : rows)
    {
        write_report_row(os, r);
        write_report_row(log, r);
    }
}

inline void run_geometry_sweep(const run_config& c, const fs::path& dir, std::ostream& log)
{
    auto rows = geometry_sweep(c.case_cfg(), arithmetic_grid(c.xc_from, c.xc_to, c.xc_step));
    auto os = open_csv(dir / "geometry_sweep.csv");
    write_geometry_header(os);
    for (const auto& r : rows)
        write_geometry_row(os, r);
    log << rows.size() << " positions written to " << (dir / "geometry_sweep.csv").string() << "\n";
}

inline void run_assumptions(const run_config& c, const fs::path& dir, std::ostream& log)
{
    auto rows = assumption_scan(c.case_cfg(), c.n_list);
    auto os = open_csv(dir / "assumptions.csv");
    for (std::ostream* s : { static_cast<std::ostream*>(&os), &log })
    {
        *s << "n,h,c_u,c_p,iterations_u,iterations_p,status\n";
        for (const auto& r : rows)
            *s << r.n << "," << format_number(r.h) << "," << format_number(r.cu.value) << ","
               << format_number(r.cp.value) << "," << r.cu.iterations << "," << r.cp.iterations << "," << r.status
               << "\n";
    }
}

inline void run_freefall(const run_config& c, const fs::path& dir, std::ostream& log)
{
    auto f = c.fall_cfg();
    if (c.vtk && f.snapshot_every == 0)
        f.snapshot_every = 10;
    if (!c.vtk)
        f.snapshot_every = 0;
    f.snapshot_dir = dir.string();
    auto r = simulate_freefall(f);
    auto os = open_csv(dir / "trajectory.csv");
    write_trajectory_csv(os, r);
    const auto& last = r.rows.back();
    log << "status " << r.status << ", " << r.rows.size() - 1 << " steps, " << r.solves << " drag solves, t = "
        << last.t << ", h2 = " << last.h2 << ", h2dot = " << last.v << ", alpha = " << last.alpha
        << ", terminal velocity = " << -f.gravity * f.mass / last.alpha << "\n";
    if (f.alpha_every > 1)
        log << "largest relative alpha change between refreshes: " << r.max_alpha_lag << "\n";
}

/// Validates, creates the run directory, writes the manifest and runs the
/// experiment. Returns the run directory.
inline fs::path run(const run_config& c, const fs::path& out_dir, std::ostream& log)
{
    c.validate();
    fs::path dir = out_dir.empty() ? fresh_run_dir(c) : out_dir;
    fs::create_directories(dir);
    write_manifest(dir, c);
    log << "output: " << dir.string() << "\n";

    if (c.command == "single")
        run_single(c, dir, log);
    else if (c.command == "convergence")
        run_convergence(c, dir, log);
    else if (c.command == "gamma-sweep")
        run_gamma_sweep(c, dir, log);
    else if (c.command == "geometry-sweep")
        run_geometry_sweep(c, dir, log);
    else if (c.command == "assumptions")
        run_assumptions(c, dir, log);
    else
        run_freefall(c, dir, log);
    return dir;
}

} // namespace cutstokes::app
