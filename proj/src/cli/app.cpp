#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "srdp/cli.hpp"
#include "srdp/prob.hpp"
#include "srdp/region_bc.hpp"

namespace srdp::cli {

namespace {

Params resolve(const RunConfig& rc) {
  Params p(command_schema(rc.command));
  if (!rc.config.empty()) {
    std::ifstream in(rc.config);
    if (!in) throw UsageError("cannot read config file " + rc.config);
    for (const auto& [k, v] : parse_key_values(in, rc.config)) p.set(k, v);
  }
  for (const auto& s : rc.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
    p.set(s.substr(0, eq), s.substr(eq + 1));
  }
  return p;
}

std::string mib(double bytes) {
  std::ostringstream os;
  os.precision(3);
  os << bytes / (1024.0 * 1024.0) << " MiB";
  return os.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secure rate-distortion-perception toolkit"};
  app.set_version_flag("--version", SRDP_VERSION);
  app.require_subcommand(1, 1);
  RunConfig rc;
  app.add_option("--out", rc.out, "output file (default: stdout)");
  app.add_option("--format", rc.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", rc.seed, "seed for every random choice");
  app.add_option("--jobs", rc.jobs, "worker threads; output does not depend on it")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", rc.config, "key = value parameter file");
  app.add_option("--set", rc.sets, "key=value override, repeatable");
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
    std::string help;
    for (const auto& s : command_schema(name))
      help += "\n  " + s.key + " (default '" + s.fallback + "'): " + s.help;
    sub->footer("Keys:" + help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  rc.command = app.get_subcommands().front()->get_name();

  try {
    const Params params = resolve(rc);
    const Document doc = run_command(rc.command, params, rc);
    std::ostringstream text;
    if (rc.format == "json") write_json(text, doc);
    else write_csv(text, doc);
    if (rc.out.empty()) {
      out << text.str();
    } else {
      std::ofstream f(rc.out, std::ios::binary);
      if (!(f << text.str())) throw std::runtime_error("cannot write " + rc.out);
    }
    return kOk;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\nrequired memory: about " << mib(e.required_bytes())
        << " (cap " << e.cap() << " cells; raise SRDP_ENUM_CAP to allow it)\n";
    return kCapExceeded;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: domain violated: " << e.what() << '\n';
    return kUsage;
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
}

}  // namespace srdp::cli
