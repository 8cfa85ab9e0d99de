#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qlitho/job.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Quantum lithography pattern evaluation and synthesis"};
    std::string job_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    bool oracle = false;

    app.add_option("--job", job_path, "Job file (JSON)")->required();
    app.add_option("--seed", seed, "Override the job's random seed");
    app.add_option("--threads", threads, "Worker threads for fitness evaluation")->check(CLI::PositiveNumber);
    app.add_flag("--oracle", oracle, "Cross-check closed forms against the Fock-space oracle");
    app.add_option("--out", out_dir, "Output directory");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        std::cerr << qlitho::cli::error_json("usage", e.what(), qlitho::cli::ExitCode::invalid_job).dump() << '\n';
        return static_cast<int>(qlitho::cli::ExitCode::invalid_job);
    }

    qlitho::cli::RunOptions options;
    options.seed = seed;
    options.threads = threads;
    options.oracle = oracle;
    if (out_dir)
        options.out_dir = *out_dir;
    return static_cast<int>(qlitho::cli::run_job_file(job_path, options, std::cerr));
}
