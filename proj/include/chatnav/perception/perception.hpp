#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "chatnav/messages.hpp"
#include "chatnav/msgbus/bus.hpp"

namespace chatnav::perception {

struct FeatureVec {
  std::vector<double> values;
  bool normalized = false;

  std::size_t dim() const { return values.size(); }
};

FeatureVec normalized(std::vector<double> v);

// Ordered, unique textual descriptions and their token forms (lowercase,
// runs of non-alphanumerics collapsed to '_').
class DescriptionSet {
 public:
  // Throws InvalidArgument when empty or when two descriptions share a token.
  explicit DescriptionSet(std::vector<std::string> descriptions);

  // Sorted unique labels of the given scene objects.
  static DescriptionSet from_objects(const std::vector<SceneObject>& objects);

  const std::vector<std::string>& descriptions() const { return descriptions_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> descriptions_;
  std::vector<std::string> tokens_;
};

std::string tokenize_description(const std::string& description);

// What a simulated camera crop shows: the true label and how blurred its
// embedding is.
struct Observation {
  std::string true_label;
  double sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dim() const = 0;
  // Unit-norm embedding of one token.
  virtual FeatureVec encode_text(const std::string& token) const = 0;
  // encode_text(true_label) plus isotropic Gaussian noise, renormalised.
  virtual FeatureVec encode_image(const Observation& obs) const;
};

// Each token hashes to a seed for a Gaussian direction on the unit sphere.
class MockEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit MockEmbeddingProvider(std::size_t dim = 64);

  std::size_t dim() const override { return dim_; }
  FeatureVec encode_text(const std::string& token) const override;

 private:
  std::size_t dim_;
};

// Precomputed embeddings loaded from a YAML file:
//   dimension: 3
//   vectors: {table: [1, 0, 0], chair: [0, 1, 0]}
// Vectors are normalised on load. Unknown tokens throw InvalidArgument.
class FileEmbeddingProvider : public EmbeddingProvider {
 public:
  static FileEmbeddingProvider load(const std::string& path);
  FileEmbeddingProvider(std::size_t dim, std::unordered_map<std::string, FeatureVec> vectors);

  std::size_t dim() const override { return dim_; }
  FeatureVec encode_text(const std::string& token) const override;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, FeatureVec> vectors_;
};

// One vector per token, order-aligned. Throws DimensionError if the provider
// returns a vector of the wrong size.
std::vector<FeatureVec> encode_text(const EmbeddingProvider& provider, const DescriptionSet& set);
FeatureVec encode_image(const EmbeddingProvider& provider, const Observation& obs);

// Dot products of f_image with each text vector. Throws DimensionError.
std::vector<double> similarity_scores(const FeatureVec& image, const std::vector<FeatureVec>& texts);

struct Recognition {
  std::size_t index = 0;
  std::string label;
  double score = 0.0;
};

// Highest score wins; ties go to the lowest index. Throws InvalidArgument for
// empty or misaligned input.
Recognition recognize(const std::vector<double>& scores, const DescriptionSet& set);

struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  int image_width = 640;
  int image_height = 480;

  bool valid() const;
  double center_u() const { return 0.5 * (x_min + x_max); }
};

// Pinhole camera looking along the robot heading.
struct CameraModel {
  int width = 640;
  int height = 480;
  double fov = 87.0 * 3.14159265358979323846 / 180.0;  // horizontal, rad

  double focal() const;
};

// Box around a visible object's projection. The box is shrunk symmetrically
// to stay inside the image so its centre column encodes the bearing exactly.
// Throws InvalidArgument if the object centre is outside the field of view.
BBox synthesize_bbox(const VisibleObject& obj, const CameraModel& cam);

// World position of the point `range` metres along the ray through the box
// centre. Throws InvalidArgument for an invalid box.
std::pair<double, double> localize(const BBox& bbox, double range, const Pose2D& pose, const CameraModel& cam);

struct PerceptionConfig {
  double sigma = 0.0;               // embedding noise
  std::uint64_t seed = 1;           // noise stream
  double position_tolerance = 0.5;  // m, for detection_correct
  CameraModel camera;
};

struct PerceptionResult {
  std::vector<Detection> detections;
  std::vector<DetectionCheck> checks;  // aligned with detections
};

bool detection_correct(const DetectionCheck& c, double position_tolerance);

// Recognition plus localisation for every visible object in a snapshot.
class Perceiver {
 public:
  Perceiver(std::shared_ptr<const EmbeddingProvider> provider, DescriptionSet descriptions,
            PerceptionConfig config = {});

  PerceptionResult perceive(const SensorSnapshot& snapshot);

  const DescriptionSet& descriptions() const { return descriptions_; }
  const PerceptionConfig& config() const { return config_; }
  void set_sigma(double sigma) { config_.sigma = sigma; }

 private:
  std::shared_ptr<const EmbeddingProvider> provider_;
  DescriptionSet descriptions_;
  std::vector<FeatureVec> text_vectors_;
  PerceptionConfig config_;
  std::mt19937_64 rng_;
};

// Interaction record describing one detection against ground truth.
InteractionRecord detection_record(const DetectionCheck& check, const Detection& det, double tolerance);

// Publishes one DetectionList on "detections" (possibly empty). With
// `log_records`, also one detection record per detection on
// "log/interaction".
PerceptionResult perceive_and_publish(Perceiver& perceiver, const SensorSnapshot& snapshot, msgbus::Bus& bus,
                                      bool log_records = false);

struct PerceptionNodeOptions {
  int every_n = 10;  // perceive one in every n sensor snapshots
  bool log_records = false;
};

// Consumes "sensors" and runs perception on a decimated cadence.
class PerceptionNode {
 public:
  PerceptionNode(msgbus::Bus& bus, Perceiver perceiver, PerceptionNodeOptions options = {});

  // Handles all pending snapshots; returns how many were perceived.
  std::size_t poll();

  Perceiver& perceiver() { return perceiver_; }
  const std::vector<Detection>& last_detections() const { return last_; }

 private:
  msgbus::Bus& bus_;
  Perceiver perceiver_;
  PerceptionNodeOptions options_;
  msgbus::Subscription sensors_;
  std::uint64_t seen_ = 0;
  std::vector<Detection> last_;
};

}  // namespace chatnav::perception
