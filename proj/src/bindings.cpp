#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "peerfair/common.hpp"
#include "peerfair/report.hpp"
#include "peerfair/synth.hpp"

namespace py = pybind11;
using namespace peerfair;

namespace {

AuditConfig config_from_optional_json(const std::string& config_json) {
    if (config_json.empty()) return AuditConfig{};
    return AuditConfig::from_json_text(config_json);
}

std::string run_audit_json(const Dataset& dataset, const std::string& config_json,
                           int threads) {
    const AuditConfig config = config_from_optional_json(config_json);
    PipelineOptions options;
    options.threads = threads;
    const PipelineResult result = run_pipeline(dataset, config, options);
    const RunManifest manifest =
        make_manifest(config, fingerprint_bytes(dataset_to_csv(dataset)),
                      fingerprint_bytes(dataset.schema().to_json_text()));
    return audit_report_to_json(manifest, result, dataset);
}

std::string run_imbalance_json(const Dataset& dataset, const std::string& config_json,
                               const std::vector<double>& omegas, int repeats,
                               int threads) {
    const AuditConfig config = config_from_optional_json(config_json);
    ImbalanceOptions options;
    options.omegas = omegas;
    options.repeats = repeats;
    options.threads = threads;
    const ImbalanceReport report = run_imbalance_study(dataset, config, options);
    const RunManifest manifest =
        make_manifest(config, fingerprint_bytes(dataset_to_csv(dataset)),
                      fingerprint_bytes(dataset.schema().to_json_text()));
    return imbalance_report_to_json(manifest, report);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "peer-comparison fairness auditing core";

    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<Error>(m, "PipelineError", PyExc_RuntimeError);

    py::class_<Dataset>(m, "Dataset")
        .def("__len__", &Dataset::size)
        .def_property_readonly("n_protected", &Dataset::count_protected)
        .def_property_readonly("n_unprotected", &Dataset::count_unprotected)
        .def_property_readonly("n_favourable", &Dataset::count_favourable)
        .def("schema_json", [](const Dataset& d) { return d.schema().to_json_text(); })
        .def("to_csv", &dataset_to_csv);

    m.def("load_dataset",
          [](const std::string& csv_path, const std::string& schema_path) {
              return load_dataset(csv_path, schema_path);
          },
          py::arg("csv_path"), py::arg("schema_path"));
    m.def("load_dataset_text",
          [](const std::string& csv_text, const std::string& schema_json) {
              return load_dataset_text(csv_text, FeatureSchema::from_json_text(schema_json));
          },
          py::arg("csv_text"), py::arg("schema_json"));
    m.def("split",
          [](const Dataset& dataset, double train_fraction, std::uint64_t seed) {
              return split(dataset, train_fraction, seed);
          },
          py::arg("dataset"), py::arg("train_fraction") = 0.8, py::arg("seed") = 0);
    m.def("compute_marginal", &compute_marginal, py::arg("dataset"));
    m.def("undersample_to_omega", &undersample_to_omega, py::arg("dataset"),
          py::arg("target_omega"), py::arg("seed") = 0);

    m.def("default_config_json", [] { return AuditConfig{}.to_json_text(); });
    m.def("auc",
          [](const std::vector<double>& scores, const std::vector<int>& labels) {
              return auc(scores, labels);
          },
          py::arg("scores"), py::arg("labels"));
    m.def("sample_peer_means",
          [](const std::vector<double>& peer_probs, int subset_size, int n_subsets,
             std::uint64_t seed) {
              return sample_peer_means(peer_probs, subset_size, n_subsets, seed);
          },
          py::arg("peer_probs"), py::arg("subset_size") = 30, py::arg("n_subsets") = 100,
          py::arg("seed") = 0);
    m.def("z_test",
          [](const std::vector<double>& t_bars, double p_a, const std::string& variant,
             bool one_sided) {
              const ZResult r = z_test(t_bars, p_a, test_statistic_from_string(variant),
                                       one_sided);
              return py::make_tuple(r.z, r.p_value);
          },
          py::arg("t_bars"), py::arg("p_a"), py::arg("variant") = "grand_mean",
          py::arg("one_sided") = false);
    m.def("categorize",
          [](double p_a, double peer_mean, double p_value, double alpha,
             double extreme_factor) {
              return to_string(categorize(p_a, peer_mean, p_value, alpha, extreme_factor));
          },
          py::arg("p_a"), py::arg("peer_mean"), py::arg("p_value"), py::arg("alpha") = 0.05,
          py::arg("extreme_factor") = 0.1);

    m.def("run_audit", &run_audit_json, py::arg("dataset"), py::arg("config_json") = "",
          py::arg("threads") = 1,
          "Full pipeline; returns the audit report as a JSON string.");
    m.def("run_imbalance", &run_imbalance_json, py::arg("dataset"),
          py::arg("config_json") = "", py::arg("omegas"), py::arg("repeats") = 5,
          py::arg("threads") = 1,
          "Under-sampling stability study; returns a JSON string.");
    m.def("report_to_scatter_csv", &report_json_to_scatter_csv, py::arg("report_json"));
    m.def("report_to_category_csv", &report_json_to_category_csv, py::arg("report_json"));

    m.def("sme_preset_json",
          [](int n, std::uint64_t seed, double bias) {
              SynthSpec spec = SynthSpec::sme_preset(n, seed);
              spec.direct_bias = bias;
              return spec.to_json_text();
          },
          py::arg("n") = 4159, py::arg("seed") = 1, py::arg("bias") = 0.0);
    m.def("null_preset_json",
          [](int n, std::uint64_t seed, double bias) {
              SynthSpec spec = SynthSpec::bias_preset(n, bias, seed);
              return spec.to_json_text();
          },
          py::arg("n") = 1000, py::arg("seed") = 1, py::arg("bias") = 0.0);
    m.def("generate",
          [](const std::string& spec_json) {
              auto [dataset, truth] = generate(SynthSpec::from_json_text(spec_json));
              py::dict truth_dict;
              truth_dict["ids"] = truth.ids;
              truth_dict["p_protected"] = truth.p_minus;
              truth_dict["p_unprotected"] = truth.p_plus;
              return py::make_tuple(std::move(dataset), std::move(truth_dict));
          },
          py::arg("spec_json"), "Generate a synthetic dataset plus its ground truth.");

    m.attr("__version__") = kVersion;
}
