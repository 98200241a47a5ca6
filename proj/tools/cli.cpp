#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "ellcert/certify.hpp"
#include "ellcert/ellipsoid.hpp"
#include "ellcert/errors.hpp"
#include "ellcert/mpc_compile.hpp"
#include "ellcert/mpc_model.hpp"

namespace ellcert::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mpc::ParseError({0, 0}, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content,
                CommandOutcome& out) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << content) || !f.flush())
    throw Error("cannot write '" + path + "'");
  out.artifacts.push_back(path);
}

DenseVector parse_vector(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    vals.push_back(v);
  }
  if (vals.empty()) throw Error("empty vector argument");
  return DenseVector::of(std::move(vals));
}

DenseMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open plant matrix '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& c : line)
      if (c == ',' || c == '\t') c = ' ';
    std::stringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("empty plant matrix '" + path + "'");
  const std::size_t cols = rows[0].size();
  std::vector<double> flat;
  for (const auto& r : rows) {
    if (r.size() != cols) throw Error("ragged plant matrix '" + path + "'");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return DenseMatrix::of(rows.size(), cols, std::move(flat));
}

std::string fmt(double x) { return mpc::shortest_double(x); }

std::string vector_str(const DenseVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s + ")";
}

DenseMatrix plant_constant(const mpc::MpcModel& model, const char* name) {
  const mpc::ConstantDef* c = model.find_constant(name);
  if (!c || !c->is_matrix)
    throw Error(std::string("model has no matrix constant '") + name +
                "'; pass --plant");
  return c->matrix;
}

std::string certify_summary(const Certificate& cert) {
  std::ostringstream s;
  s << "n=" << cert.n << " r=" << fmt(cert.r) << " R=" << fmt(cert.R)
    << " V=" << fmt(cert.V) << " eps=" << fmt(cert.epsilon)
    << " lambda=" << fmt(cert.lambda) << "\n";
  s << "N=" << cert.N << "\n";
  s << "N_lambda_paper=" << cert.N_lambda_paper
    << " (convergent: " << (cert.lambda_convergent ? "yes" : "no") << ")\n";
  s << "N_lambda_safe=" << cert.N_lambda_safe << " (convergent: "
    << (cert.N_lambda_safe > 0 ? "yes" : "no") << ")\n";
  s << "sigma_min_floor=" << fmt(cert.sigma_min_floor)
    << " sigma_max_cap=" << fmt(cert.sigma_max_cap)
    << " cond_bound=" << fmt(cert.cond_bound) << "\n";
  s << "normB_bound=" << fmt(cert.normB_bound)
    << " normc_bound=" << fmt(cert.normc_bound) << " E_B=" << fmt(cert.E_B)
    << " E_c=" << fmt(cert.E_c) << "\n";
  for (const std::string& note : cert.notes) s << "note: " << note << "\n";
  return s.str();
}

int run_checked(const std::vector<std::string>& args, CommandOutcome& out) {
  CLI::App app{"ellipsoid-method SOCP solver and MPC certifier"};
  app.require_subcommand(1);

  std::string file, json_path, trace_path, x0_arg, plant_arg, out_path;
  double ro = 27.0;
  double period = 0.5;
  int steps = 0;

  CLI::App* check = app.add_subcommand("check", "parse and validate a model");
  check->add_option("file", file)->required();
  CLI::Option* check_ro = check->add_option("--ro", ro, "parameter-ball radius");

  CLI::App* certify =
      app.add_subcommand("certify", "compute the a-priori certificate");
  certify->add_option("file", file)->required();
  certify->add_option("--json", json_path, "write the certificate as JSON");
  CLI::Option* certify_ro = certify->add_option("--ro", ro, "parameter-ball radius");

  double slack = 0.0;
  CLI::App* solve =
      app.add_subcommand("solve", "solve one instance of the family");
  solve->add_option("file", file)->required();
  solve->add_option("--x0", x0_arg, "parameter vector v1,...,vn")->required();
  solve->add_option("--trace", trace_path, "write the iteration trace CSV");
  CLI::Option* solve_ro = solve->add_option("--ro", ro, "parameter-ball radius");
  solve->add_option("--slack", slack,
                    "feasibility slack for reporting (the solver itself "
                    "stores exactly feasible points)");

  CLI::App* simulate = app.add_subcommand("simulate", "run the closed loop");
  simulate->add_option("file", file)->required();
  simulate->add_option("--x0", x0_arg, "initial state v1,...,vn")->required();
  simulate->add_option("--steps", steps, "number of steps")->required();
  simulate->add_option("--plant", plant_arg, "plant matrices A.csv,B.csv");
  simulate->add_option("--out", out_path, "write the trajectory CSV");
  simulate->add_option("--T", period, "sample period for the t column");
  CLI::Option* simulate_ro = simulate->add_option("--ro", ro, "parameter-ball radius");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app.parse(reversed);

  if (check->parsed()) {
    const mpc::MpcModel model = mpc::parse(read_file(file));
    mpc::CompileOptions opts;
    if (check_ro->count()) opts.r_o = ro;
    opts.recompute = false;
    opts.require_information = false;
    const mpc::CompiledFamily fam = mpc::compile(model, opts);
    std::ostringstream s;
    s << "n_x=" << fam.projection.n_x << ", d=" << fam.projection.d
      << ", n_z=" << fam.projection.n_z << ", n=" << fam.n
      << ", constraints: " << model.constraints.size() << " groups\n";
    s << "input " << model.input_name << "(" << model.input_dim
      << "), variables:";
    for (const auto& v : model.variables)
      s << " " << v.name << "(" << v.rows << "," << v.cols << ")";
    s << "\n";
    s << "linear rows: " << fam.polytope.A_f.rows()
      << ", cones: " << fam.cones.size() << " (epigraph: " << fam.n_t
      << ")\n";
    out.summary = s.str();
    return 0;
  }

  if (certify->parsed()) {
    const mpc::MpcModel model = mpc::parse(read_file(file));
    mpc::CompileOptions opts;
    if (certify_ro->count()) opts.r_o = ro;
    const mpc::CompiledFamily fam = mpc::compile(model, opts);
    if (!json_path.empty())
      write_file(json_path, certificate_to_json(fam.certificate), out);
    out.summary = certify_summary(fam.certificate);
    return 0;
  }

  if (solve->parsed()) {
    const mpc::MpcModel model = mpc::parse(read_file(file));
    mpc::CompileOptions opts;
    if (solve_ro->count()) opts.r_o = ro;
    opts.recompute = false;
    const mpc::CompiledFamily fam = mpc::compile(model, opts);
    mpc::InstanceOptions iopts;
    iopts.record_trace = !trace_path.empty();
    const DenseVector x0 = parse_vector(x0_arg);
    const mpc::InstanceResult res = mpc::solve_instance(fam, x0, iopts);
    if (!trace_path.empty())
      write_file(trace_path, trace_to_csv(res.outcome.trace), out);
    std::ostringstream s;
    s << "status=" << to_string(res.outcome.status)
      << " iterations=" << res.outcome.iterations_used
      << " corrective=" << res.outcome.corrective_steps << "\n";
    if (res.param_outside_envelope)
      s << "warning: ||x0|| = " << fmt(two_norm(x0))
        << " exceeds the certified radius " << fmt(fam.polytope.r_o) << "\n";
    if (res.outcome.best) {
      s << "u=" << vector_str(res.u_applied)
        << " cost=" << fmt(res.cost_value) << "\n";
      if (slack > 0.0) {
        // re-evaluate the returned plan against the projected rows
        DenseVector z(fam.projection.n_z);
        for (std::size_t j = 0; j < z.size(); ++j)
          z[j] = res.outcome.best->first[j];
        std::size_t violations = 0;
        const DenseVector lhs = matvec(fam.polytope.A_f, z);
        for (std::size_t i = 0; i < fam.polytope.A_f.rows(); ++i) {
          const double bound =
              fam.polytope.b_o[i] + dot(fam.polytope.Q.row(i), x0);
          if (lhs[i] > bound + slack) ++violations;
        }
        s << "rows beyond slack " << fmt(slack) << ": " << violations << "\n";
      }
    }
    out.summary = s.str();
    return res.outcome.best ? 0 : 2;
  }

  if (simulate->parsed()) {
    const mpc::MpcModel model = mpc::parse(read_file(file));
    mpc::CompileOptions opts;
    if (simulate_ro->count()) opts.r_o = ro;
    opts.recompute = false;
    const mpc::CompiledFamily fam = mpc::compile(model, opts);
    DenseMatrix A, B;
    if (!plant_arg.empty()) {
      const auto comma = plant_arg.find(',');
      if (comma == std::string::npos)
        throw Error("--plant expects A.csv,B.csv");
      A = read_matrix_csv(plant_arg.substr(0, comma));
      B = read_matrix_csv(plant_arg.substr(comma + 1));
    } else {
      A = plant_constant(model, "A");
      B = plant_constant(model, "B");
    }
    const DenseVector x0 = parse_vector(x0_arg);
    const mpc::Trajectory traj = mpc::simulate(fam, A, B, x0, steps);
    if (!out_path.empty())
      write_file(out_path, mpc::trajectory_to_csv(traj, period), out);
    std::ostringstream s;
    s << "steps=" << traj.steps.size() << "\n";
    if (traj.aborted) {
      s << "aborted: " << traj.abort_reason << "\n";
      out.summary = s.str();
      return 2;
    }
    s << "final state " << vector_str(traj.final_state)
      << " |x|=" << fmt(two_norm(traj.final_state)) << "\n";
    out.summary = s.str();
    return 0;
  }
  return 1;
}

}  // namespace

CommandOutcome run(const std::vector<std::string>& args) {
  CommandOutcome out;
  try {
    out.exit_code = run_checked(args, out);
  } catch (const CLI::CallForHelp& e) {
    out.summary = "usage: ellcert {check|certify|solve|simulate} <file> [options]\n";
    out.exit_code = 0;
  } catch (const CLI::ParseError& e) {
    out.summary = std::string(e.what()) + "\n";
    out.exit_code = 1;
  } catch (const mpc::ParseError& e) {
    out.summary = std::string(e.what()) + "\n";
    out.exit_code = 1;
  } catch (const mpc::MissingInformation& e) {
    out.summary = std::string(e.what()) + "\n";
    out.exit_code = 1;
  } catch (const Error& e) {
    out.summary = std::string(e.what()) + "\n";
    out.exit_code = 2;
  } catch (const std::exception& e) {
    out.summary = std::string(e.what()) + "\n";
    out.exit_code = 2;
  }
  return out;
}

}  // namespace ellcert::cli
