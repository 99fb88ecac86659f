#include "ffcnn/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ffcnn/bp_baseline.hpp"
#include "ffcnn/cam.hpp"
#include "ffcnn/parallel.hpp"
#include "ffcnn/train.hpp"

namespace ffcnn {

namespace {

std::string fmt_float(float v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return buf;
}

std::string join_ints(const std::vector<int>& v, char sep = ',') {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(v[i]);
    }
    return s;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw std::runtime_error("config key " + key + ": bad integer \"" + item + "\"");
        }
    }
    if (out.empty()) throw std::runtime_error("config key " + key + ": empty list");
    return out;
}

int parse_int(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + key + ": bad integer \"" + s + "\"");
    }
}

uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + key + ": bad integer \"" + s + "\"");
    }
}

float parse_float(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        const float v = std::stof(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("config key " + key + ": bad number \"" + s + "\"");
    }
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw std::runtime_error("config key " + key + ": bad boolean \"" + s + "\" (use true/false)");
}

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

template <class T>
std::vector<T> parse_grid(const std::string& s, const std::string& key, T (*one)(const std::string&, const std::string&)) {
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (ss >> item) out.push_back(one(item, key));
    if (out.empty()) throw std::runtime_error("config key " + key + ": empty grid");
    return out;
}

}  // namespace

std::string ExperimentConfig::echo() const {
    std::ostringstream os;
    os << "algo = " << algo << "\n";
    os << "filters = " << join_ints(train.filters) << "\n";
    os << "kernel = " << train.kernel << "\n";
    os << "padding = " << (train.padding == Padding::Same ? "same" : "valid") << "\n";
    os << "epochs = " << train.epochs << "\n";
    os << "batch = " << train.batch << "\n";
    os << "lr = " << fmt_float(train.lr) << "\n";
    os << "bp_lr = " << fmt_float(bp_lr) << "\n";
    os << "k = " << fmt_float(train.label_intensity) << "\n";
    os << "label_set = " << (train.label_set == LabelSetId::Set1 ? 1 : 2) << "\n";
    if (!train.label_map_file.empty()) os << "label_map_file = " << train.label_map_file << "\n";
    os << "seed = " << train.seed << "\n";
    os << "include_first_layer_loss = " << (train.include_first_layer_loss ? "true" : "false") << "\n";
    os << "pooling = " << (train.pooling ? "true" : "false") << "\n";
    os << "sequential_steps = " << (train.sequential_steps ? "true" : "false") << "\n";
    os << "classifier_input = " << (train.classifier_input == ClassifierInput::Neutral ? "neutral" : "true_label")
       << "\n";
    os << "inference_mode = " << (inference_mode == InferenceMode::Classifier ? "classifier" : "goodness") << "\n";
    os << "data_dir = " << data_dir << "\n";
    os << "train_limit = " << train_limit << "\n";
    os << "val_limit = " << val_limit << "\n";
    os << "test_limit = " << test_limit << "\n";
    os << "final_test = " << (final_test ? "true" : "false") << "\n";
    return os.str();
}

uint64_t ExperimentConfig::hash() const {
    // FNV-1a over the canonical echo
    const std::string s = echo();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string ExperimentConfig::hash_hex() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::map<std::string, bool> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected key = value, got \"" +
                                     stripped + "\"");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (seen.count(key)) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": duplicate key \"" + key + "\"");
        }
        seen[key] = true;

        if (key == "algo") {
            if (value != "ff" && value != "bp") {
                throw std::runtime_error(origin + ": algo must be ff or bp, got \"" + value + "\"");
            }
            cfg.algo = value;
        } else if (key == "filters") {
            cfg.train.filters = parse_int_list(value, key);
        } else if (key == "kernel") {
            cfg.train.kernel = parse_int(value, key);
        } else if (key == "padding") {
            if (value == "same") {
                cfg.train.padding = Padding::Same;
            } else if (value == "valid") {
                cfg.train.padding = Padding::Valid;
            } else {
                throw std::runtime_error(origin + ": padding must be same or valid, got \"" + value + "\"");
            }
        } else if (key == "epochs") {
            cfg.train.epochs = parse_int(value, key);
        } else if (key == "batch") {
            cfg.train.batch = parse_int(value, key);
        } else if (key == "lr") {
            cfg.train.lr = parse_float(value, key);
        } else if (key == "bp_lr") {
            cfg.bp_lr = parse_float(value, key);
        } else if (key == "k") {
            cfg.train.label_intensity = parse_float(value, key);
        } else if (key == "label_set") {
            const int v = parse_int(value, key);
            if (v != 1 && v != 2) throw std::runtime_error(origin + ": label_set must be 1 or 2");
            cfg.train.label_set = v == 1 ? LabelSetId::Set1 : LabelSetId::Set2;
        } else if (key == "label_map_file") {
            cfg.train.label_map_file = value;
        } else if (key == "seed") {
            cfg.train.seed = parse_u64(value, key);
        } else if (key == "include_first_layer_loss") {
            cfg.train.include_first_layer_loss = parse_bool(value, key);
        } else if (key == "pooling") {
            cfg.train.pooling = parse_bool(value, key);
        } else if (key == "sequential_steps") {
            cfg.train.sequential_steps = parse_bool(value, key);
        } else if (key == "classifier_input") {
            if (value == "neutral") {
                cfg.train.classifier_input = ClassifierInput::Neutral;
            } else if (value == "true_label") {
                cfg.train.classifier_input = ClassifierInput::TrueLabelTrain;
            } else {
                throw std::runtime_error(origin + ": classifier_input must be neutral or true_label");
            }
        } else if (key == "inference_mode") {
            if (value == "classifier") {
                cfg.inference_mode = InferenceMode::Classifier;
            } else if (value == "goodness") {
                cfg.inference_mode = InferenceMode::Goodness;
            } else {
                throw std::runtime_error(origin + ": inference_mode must be classifier or goodness");
            }
        } else if (key == "data_dir") {
            cfg.data_dir = value;
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "train_limit") {
            cfg.train_limit = parse_int(value, key);
        } else if (key == "val_limit") {
            cfg.val_limit = parse_int(value, key);
        } else if (key == "test_limit") {
            cfg.test_limit = parse_int(value, key);
        } else if (key == "final_test") {
            cfg.final_test = parse_bool(value, key);
        } else if (key == "threads") {
            cfg.threads = parse_int(value, key);
        } else if (key == "sweep_workers") {
            cfg.sweep_workers = parse_int(value, key);
        } else if (key == "sweep_filters") {
            std::stringstream ss(value);
            std::string cell;
            while (ss >> cell) cfg.sweep_filters.push_back(parse_int_list(cell, key));
            if (cfg.sweep_filters.empty()) throw std::runtime_error(origin + ": sweep_filters grid is empty");
        } else if (key == "sweep_kernels") {
            cfg.sweep_kernels = parse_grid<int>(value, key, parse_int);
        } else if (key == "sweep_batches") {
            cfg.sweep_batches = parse_grid<int>(value, key, parse_int);
        } else if (key == "sweep_k") {
            cfg.sweep_k = parse_grid<float>(value, key, parse_float);
        } else if (key == "sweep_label_sets") {
            cfg.sweep_label_sets = parse_grid<int>(value, key, parse_int);
            for (int v : cfg.sweep_label_sets) {
                if (v != 1 && v != 2) throw std::runtime_error(origin + ": sweep_label_sets entries must be 1 or 2");
            }
        } else {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": unknown config key \"" + key + "\"");
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

LoadedData load_experiment_data(const ExperimentConfig& cfg) {
    if (cfg.data_dir.empty()) throw std::runtime_error("config: data_dir is required");
    MnistFiles files = load_mnist_dir(cfg.data_dir);
    auto [train, val] = split_train_val(files.train, cfg.train.seed);
    LoadedData data{std::move(train), std::move(val), std::move(files.test)};
    if (cfg.train_limit > 0) data.train = data.train.take(cfg.train_limit);
    if (cfg.val_limit > 0) data.val = data.val.take(cfg.val_limit);
    if (cfg.test_limit > 0) data.test = data.test.take(cfg.test_limit);
    return data;
}

namespace {

std::vector<std::string> provenance_lines(const ExperimentConfig& cfg) {
    std::vector<std::string> lines;
    lines.push_back("ffcnn metrics v1 algo=" + cfg.algo + " config_hash=" + cfg.hash_hex() + " seed=" +
                    std::to_string(cfg.train.seed));
    std::istringstream echo(cfg.echo());
    std::string line;
    while (std::getline(echo, line)) lines.push_back("cfg " + line);
    return lines;
}

void apply_threads(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) set_worker_threads(cfg.threads);
}

}  // namespace

int run_train(const ExperimentConfig& cfg) {
    apply_threads(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    LoadedData data = load_experiment_data(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    RunMetrics metrics;
    int layer_count = static_cast<int>(cfg.train.filters.size());
    std::string ckpt_path = cfg.out_dir + "/checkpoint.ffc";

    if (cfg.algo == "bp") {
        TrainConfig bp_cfg = cfg.train;
        bp_cfg.lr = cfg.bp_lr;
        BpNetwork net(bp_cfg, data.train.images.dim(1), data.train.images.dim(2));
        Rng init_rng = Rng(bp_cfg.seed).split(1);
        net.init_params(init_rng);
        TrainHooks hooks;
        hooks.val_limit = 0;  // limits already applied to the split
        hooks.on_epoch = [&](const EpochRow& row) {
            std::printf("epoch %3d  lr %.3g  loss %.5f  train %.2f%%  val %.2f%%\n", row.epoch,
                        static_cast<double>(row.lr), row.network_loss, row.train_acc, row.val_acc);
            std::fflush(stdout);
        };
        metrics = train_bp(net, data.train, data.val, bp_cfg, hooks);
        if (cfg.final_test && data.test.size() > 0) {
            int correct = 0;
            ConfusionMatrix confusion{};
            for (int i = 0; i < data.test.size(); ++i) {
                const int pred = net.predict(data.test.image(i));
                const int truth = data.test.labels[static_cast<size_t>(i)];
                confusion[static_cast<size_t>(truth)][static_cast<size_t>(pred)]++;
                if (pred == truth) ++correct;
            }
            metrics.test_accuracy_pct = 100.0 * correct / data.test.size();
            metrics.confusion = confusion;
        }
        save_bp_checkpoint(ckpt_path, net, cfg.echo());
    } else {
        FfNetwork net(cfg.train, data.train.images.dim(1), data.train.images.dim(2));
        ClassifierHead head(net.feature_count(1));
        Rng init_rng = Rng(cfg.train.seed).split(1);
        net.init_params(init_rng);
        TrainHooks hooks;
        hooks.on_epoch = [&](const EpochRow& row) {
            std::printf("epoch %3d  lr %.3g  loss %.5f  train %.2f%%  val %.2f%%\n", row.epoch,
                        static_cast<double>(row.lr), row.network_loss, row.train_acc, row.val_acc);
            std::fflush(stdout);
        };
        metrics = train_ff(net, head, data.train, data.val, cfg.train, hooks);
        if (cfg.final_test && data.test.size() > 0) {
            const WaveBank bank(cfg.train.label_config(), net.input_h(), net.input_w());
            EvalResult res = evaluate(net, &head, data.test, cfg.inference_mode, bank);
            metrics.test_accuracy_pct = res.accuracy_pct;
            metrics.confusion = res.confusion;
        }
        save_ff_checkpoint(ckpt_path, net, head, cfg.echo());
    }

    write_metrics_csv(cfg.out_dir + "/metrics.csv", metrics, layer_count, provenance_lines(cfg));
    if (cfg.final_test) {
        std::ofstream summary(cfg.out_dir + "/summary.txt");
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        summary << "config_hash " << cfg.hash_hex() << "\nseed " << cfg.train.seed << "\nalgo " << cfg.algo
                << "\ntest_accuracy_pct " << metrics.test_accuracy_pct << "\nwall_clock_s " << secs
                << "\nconv_macs " << conv_mac_count() << "\n";
        write_confusion_csv(cfg.out_dir + "/confusion.csv", metrics.confusion);
        render_confusion(cfg.out_dir + "/confusion.ppm", metrics.confusion);
        std::printf("final test accuracy: %.2f%%\n", metrics.test_accuracy_pct);
    }
    return 0;
}

int run_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path, const std::string& split,
             InferenceMode mode) {
    apply_threads(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    LoadedData data = load_experiment_data(cfg);
    const Dataset& ds = split == "train" ? data.train : split == "val" ? data.val : data.test;

    ContainerReader probe(checkpoint_path);
    double accuracy = 0.0;
    ConfusionMatrix confusion{};
    if (probe.type() == PayloadType::BpNetwork) {
        BpCheckpoint ckpt = load_bp_checkpoint(checkpoint_path);
        int correct = 0;
        for (int i = 0; i < ds.size(); ++i) {
            const int pred = ckpt.net.predict(ds.image(i));
            const int truth = ds.labels[static_cast<size_t>(i)];
            confusion[static_cast<size_t>(truth)][static_cast<size_t>(pred)]++;
            if (pred == truth) ++correct;
        }
        accuracy = ds.size() > 0 ? 100.0 * correct / ds.size() : 0.0;
    } else {
        FfCheckpoint ckpt = load_ff_checkpoint(checkpoint_path);
        const WaveBank bank(cfg.train.label_config(), ckpt.net.input_h(), ckpt.net.input_w());
        EvalResult res = evaluate(ckpt.net, ckpt.head.weights.size() > 0 ? &ckpt.head : nullptr, ds, mode, bank);
        accuracy = res.accuracy_pct;
        confusion = res.confusion;
    }
    write_confusion_csv(cfg.out_dir + "/confusion.csv", confusion);
    render_confusion(cfg.out_dir + "/confusion.ppm", confusion);
    std::printf("%s accuracy (%s): %.2f%% over %d images\n", split.c_str(),
                mode == InferenceMode::Classifier ? "classifier" : "goodness", accuracy, ds.size());
    return 0;
}

int run_cam(const ExperimentConfig& cfg, const std::string& checkpoint_path, int image_index,
            std::optional<int> target_class, const std::vector<int>& layers, const std::string& split) {
    apply_threads(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    LoadedData data = load_experiment_data(cfg);
    const Dataset& ds = split == "train" ? data.train : split == "val" ? data.val : data.test;
    if (image_index < 0 || image_index >= ds.size()) {
        throw std::runtime_error("cam: image index " + std::to_string(image_index) + " outside dataset of " +
                                 std::to_string(ds.size()));
    }
    FfCheckpoint ckpt = load_ff_checkpoint(checkpoint_path);
    if (ckpt.head.weights.size() == 0) {
        throw std::runtime_error("cam: checkpoint has no trained classifier head");
    }
    const Tensor image = ds.image(image_index);
    const int cls = target_class.value_or(ds.labels[static_cast<size_t>(image_index)]);

    std::vector<int> use_layers = layers;
    if (use_layers.empty()) {
        for (int l = 2; l <= ckpt.net.num_layers(); ++l) use_layers.push_back(l);
    }
    std::vector<CamMap> maps;
    for (int l : use_layers) {
        CamMap cam = layer_cam(ckpt.net, ckpt.head, image, cls, l);
        write_cam_csv(cfg.out_dir + "/cam_l" + std::to_string(l) + ".csv", cam);
        render_cam(cam, &image, cfg.out_dir + "/cam_l" + std::to_string(l) + ".ppm");
        maps.push_back(std::move(cam));
    }
    CamMap combined = combined_cam(maps);
    write_cam_csv(cfg.out_dir + "/cam_combined.csv", combined);
    render_cam(combined, &image, cfg.out_dir + "/cam_combined.ppm");
    render_cam(combined, &image, cfg.out_dir + "/cam_overlay.ppm", 0.45f);
    std::printf("cam written for image %d, class %d, layers", image_index, cls);
    for (int l : use_layers) std::printf(" %d", l);
    std::printf("\n");
    return 0;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
    const bool any = !cfg.sweep_filters.empty() || !cfg.sweep_kernels.empty() || !cfg.sweep_batches.empty() ||
                     !cfg.sweep_k.empty() || !cfg.sweep_label_sets.empty();
    if (!any) throw std::runtime_error("sweep: no sweep_* grids in config");

    const std::vector<std::vector<int>> filters =
        cfg.sweep_filters.empty() ? std::vector<std::vector<int>>{cfg.train.filters} : cfg.sweep_filters;
    const std::vector<int> kernels = cfg.sweep_kernels.empty() ? std::vector<int>{cfg.train.kernel} : cfg.sweep_kernels;
    const std::vector<int> batches = cfg.sweep_batches.empty() ? std::vector<int>{cfg.train.batch} : cfg.sweep_batches;
    const std::vector<float> ks = cfg.sweep_k.empty() ? std::vector<float>{cfg.train.label_intensity} : cfg.sweep_k;
    const std::vector<int> sets =
        cfg.sweep_label_sets.empty()
            ? std::vector<int>{cfg.train.label_set == LabelSetId::Set1 ? 1 : 2}
            : cfg.sweep_label_sets;

    std::vector<ExperimentConfig> cells;
    uint64_t index = 0;
    for (const auto& f : filters) {
        for (int k : kernels) {
            for (int b : batches) {
                for (float ki : ks) {
                    for (int s : sets) {
                        ExperimentConfig cell = cfg;
                        cell.train.filters = f;
                        cell.train.kernel = k;
                        cell.train.batch = b;
                        cell.train.label_intensity = ki;
                        cell.train.label_set = s == 1 ? LabelSetId::Set1 : LabelSetId::Set2;
                        cell.train.seed = cfg.train.seed + index;  // master seed + cell index
                        cell.sweep_filters.clear();
                        cell.sweep_kernels.clear();
                        cell.sweep_batches.clear();
                        cell.sweep_k.clear();
                        cell.sweep_label_sets.clear();
                        char name[32];
                        std::snprintf(name, sizeof(name), "cell%03llu", static_cast<unsigned long long>(index));
                        cell.out_dir = cfg.out_dir + "/" + name;
                        cells.push_back(std::move(cell));
                        ++index;
                    }
                }
            }
        }
    }
    return cells;
}

int run_sweep(const ExperimentConfig& cfg) {
    apply_threads(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    std::vector<ExperimentConfig> cells = expand_sweep(cfg);
    std::printf("sweep: %zu cells\n", cells.size());

    struct CellResult {
        double val_classifier = 0.0;
        double val_goodness = 0.0;
        double test_acc = -1.0;
    };
    std::vector<CellResult> results(cells.size());

    const int workers = std::max(1, cfg.sweep_workers);
    std::vector<std::thread> threads;
    std::atomic<size_t> next{0};
    auto run_cell = [&](size_t i) {
        const ExperimentConfig& cell = cells[i];
        std::filesystem::create_directories(cell.out_dir);
        LoadedData data = load_experiment_data(cell);
        FfNetwork net(cell.train, data.train.images.dim(1), data.train.images.dim(2));
        ClassifierHead head(net.feature_count(1));
        Rng init_rng = Rng(cell.train.seed).split(1);
        net.init_params(init_rng);
        RunMetrics metrics = train_ff(net, head, data.train, data.val, cell.train, {});
        const WaveBank bank(cell.train.label_config(), net.input_h(), net.input_w());
        results[i].val_classifier = evaluate(net, &head, data.val, InferenceMode::Classifier, bank).accuracy_pct;
        results[i].val_goodness = evaluate(net, &head, data.val, InferenceMode::Goodness, bank).accuracy_pct;
        if (cell.final_test && data.test.size() > 0) {
            results[i].test_acc = evaluate(net, &head, data.test, cell.inference_mode, bank).accuracy_pct;
        }
        save_ff_checkpoint(cell.out_dir + "/checkpoint.ffc", net, head, cell.echo());
        write_metrics_csv(cell.out_dir + "/metrics.csv", metrics, static_cast<int>(cell.train.filters.size()),
                          provenance_lines(cell));
        std::printf("cell %zu done: val classifier %.2f%%, goodness %.2f%%\n", i, results[i].val_classifier,
                    results[i].val_goodness);
        std::fflush(stdout);
    };
    for (int t = 0; t < workers; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                run_cell(i);
            }
        });
    }
    for (auto& t : threads) t.join();

    std::ofstream summary(cfg.out_dir + "/sweep_summary.csv");
    summary << "# ffcnn sweep config_hash=" << cfg.hash_hex() << " seed=" << cfg.train.seed << "\n";
    summary << "cell,filters,kernel,batch,k,label_set,seed,val_classifier_acc,val_goodness_acc,test_acc\n";
    for (size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        summary << i << "," << join_ints(c.train.filters, '+') << "," << c.train.kernel << "," << c.train.batch << ","
                << fmt_float(c.train.label_intensity) << "," << (c.train.label_set == LabelSetId::Set1 ? 1 : 2) << ","
                << c.train.seed << "," << results[i].val_classifier << "," << results[i].val_goodness << ","
                << results[i].test_acc << "\n";
    }
    return 0;
}

int run_compare(const ExperimentConfig& cfg) {
    apply_threads(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    LoadedData data = load_experiment_data(cfg);

    // FF arm
    FfNetwork ff_net(cfg.train, data.train.images.dim(1), data.train.images.dim(2));
    ClassifierHead head(ff_net.feature_count(1));
    Rng ff_rng = Rng(cfg.train.seed).split(1);
    ff_net.init_params(ff_rng);
    train_ff(ff_net, head, data.train, data.val, cfg.train, {});
    const WaveBank bank(cfg.train.label_config(), ff_net.input_h(), ff_net.input_w());
    const double ff_val = evaluate(ff_net, &head, data.val, InferenceMode::Classifier, bank).accuracy_pct;
    const double ff_val_good = evaluate(ff_net, &head, data.val, InferenceMode::Goodness, bank).accuracy_pct;

    // BP arm under the matched architecture
    TrainConfig bp_cfg = cfg.train;
    bp_cfg.lr = cfg.bp_lr;
    BpNetwork bp_net(bp_cfg, data.train.images.dim(1), data.train.images.dim(2));
    Rng bp_rng = Rng(bp_cfg.seed).split(1);
    bp_net.init_params(bp_rng);
    train_bp(bp_net, data.train, data.val, bp_cfg, {});
    int correct = 0;
    for (int i = 0; i < data.val.size(); ++i) {
        if (bp_net.predict(data.val.image(i)) == data.val.labels[static_cast<size_t>(i)]) ++correct;
    }
    const double bp_val = data.val.size() > 0 ? 100.0 * correct / data.val.size() : 0.0;

    std::ofstream out(cfg.out_dir + "/compare.csv");
    out << "# ffcnn compare config_hash=" << cfg.hash_hex() << " seed=" << cfg.train.seed << "\n";
    out << "algo,filters,kernel,lr,val_acc\n";
    out << "ff_classifier," << join_ints(cfg.train.filters, '+') << "," << cfg.train.kernel << ","
        << fmt_float(cfg.train.lr) << "," << ff_val << "\n";
    out << "ff_goodness," << join_ints(cfg.train.filters, '+') << "," << cfg.train.kernel << ","
        << fmt_float(cfg.train.lr) << "," << ff_val_good << "\n";
    out << "bp," << join_ints(cfg.train.filters, '+') << "," << cfg.train.kernel << "," << fmt_float(cfg.bp_lr) << ","
        << bp_val << "\n";
    std::printf("ff classifier %.2f%% | ff goodness %.2f%% | bp %.2f%% (validation)\n", ff_val, ff_val_good, bp_val);
    return 0;
}

}  // namespace ffcnn
