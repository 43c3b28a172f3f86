#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"

using namespace cutstokes;

static void add_common(CLI::App* sub, app::run_config& c, std::string& out)
{
    sub->add_option("--triplet", c.triplet, "p1bp1p0, p2p1p0, q1q0q0 or q2q1q0")->capture_default_str();
    sub->add_option("--gamma0", c.gamma0, "stabilization scale, gamma = gamma0 h (0 disables it)")->capture_default_str();
    sub->add_option("--xc", c.xc, "circle centre x")->capture_default_str();
    sub->add_option("--yc", c.yc, "circle centre y")->capture_default_str();
    sub->add_option("--radius", c.radius, "circle radius")->capture_default_str();
    sub->add_option("--nu", c.nu, "viscosity")->capture_default_str();
    sub->add_option("--out", out, "output directory (default: $CUTSTOKES_OUTPUT_ROOT/<run id>)");
    sub->add_flag("--vtk", c.vtk, "write VTK files");
    sub->add_flag("--condition", c.condition, "estimate the 1-norm condition number");
}

int main(int argc, char** argv)
{
    CLI::App cli{ "Cut-cell fictitious-domain Stokes solver with interface multipliers" };
    cli.require_subcommand(1);

    app::run_config c;
    std::string out, manifest;

    auto* single = cli.add_subcommand("single", "one manufactured-solution run");
    auto* conv = cli.add_subcommand("convergence", "manufactured-solution errors over a list of meshes");
    auto* gsweep = cli.add_subcommand("gamma-sweep", "errors and conditioning against gamma0");
    auto* geo = cli.add_subcommand("geometry-sweep", "stabilized and unstabilized errors as the circle moves");
    auto* assum = cli.add_subcommand("assumptions", "interface-to-bulk inverse constants per mesh");
    auto* fall = cli.add_subcommand("freefall", "ball falling in a Stokes fluid");
    auto* rerun = cli.add_subcommand("rerun", "repeat a run from its manifest.json");

    for (auto* s : { single, conv, gsweep, geo, assum, fall })
        add_common(s, c, out);
    for (auto* s : { single, gsweep, geo, fall })
        s->add_option("--n", c.n, "elements per box side")->capture_default_str();
    for (auto* s : { conv, assum })
        s->add_option("--n-list", c.n_list, "elements per box side, one per level")->delimiter(',')->capture_default_str();
    gsweep->add_option("--gamma-list", c.gamma_list, "gamma0 values")->delimiter(',')->capture_default_str();
    geo->add_option("--xc-from", c.xc_from, "first centre x")->capture_default_str();
    geo->add_option("--xc-to", c.xc_to, "last centre x")->capture_default_str();
    geo->add_option("--xc-step", c.xc_step, "centre x increment")->capture_default_str();
    fall->add_option("--dt", c.dt, "time step")->capture_default_str();
    fall->add_option("--mass", c.mass, "ball mass")->capture_default_str();
    fall->add_option("--t-end", c.t_end, "final time")->capture_default_str();
    fall->add_option("--h2", c.h2_start, "initial height of the centre")->capture_default_str();
    fall->add_option("--gravity", c.gravity, "gravitational acceleration")->capture_default_str();
    fall->add_option("--alpha-every", c.alpha_every, "recompute the drag every k steps")->capture_default_str();
    fall->add_option("--snapshot-every", c.snapshot_every, "VTK snapshot cadence in steps (with --vtk)");
    rerun->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
    rerun->add_option("--out", out, "output directory");

    CLI11_PARSE(cli, argc, argv);

    try
    {
        if (rerun->parsed())
            c = app::read_manifest(manifest);
        else
            c.command = cli.get_subcommands().front()->get_name();
        app::run(c, out, std::cout);
    }
    catch (const std::invalid_argument& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
