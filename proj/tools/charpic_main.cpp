#include <CLI11.hpp>

#include "charpic/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"charpic: Picard schemes for u_xy = f(x, y, u, u_x, u_y) with mixed "
                 "data on two non-characteristic curves"};
    app.require_subcommand(1);

    struct SubState {
        charpic::RunOptions opts;
        CLI::App* cmd = nullptr;
    };
    std::vector<std::unique_ptr<SubState>> states;

    for (const std::string& name : charpic::subcommand_names()) {
        auto st = std::make_unique<SubState>();
        st->cmd = app.add_subcommand(name);
        st->cmd->add_option("--config", st->opts.config_path, "run configuration (JSON)")
            ->required();
        st->cmd->add_option("--set", st->opts.overrides,
                            "override config values, e.g. --set solver.tol=1e-8");
        st->cmd->add_option("--out", st->opts.out_dir, "output directory (overrides output.dir)");
        if (name == "verify") {
            st->cmd->add_option("--against", st->opts.against_path, "field.csv to verify")
                ->required();
        }
        states.push_back(std::move(st));
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& st : states)
        if (st->cmd->parsed()) return charpic::run_subcommand(st->cmd->get_name(), st->opts);
    return 2;
}
