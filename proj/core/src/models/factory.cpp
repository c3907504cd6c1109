#include <memory>

#include "upbench/error.hpp"

#include "architectures.hpp"

namespace upbench::models {

std::unique_ptr<UpliftModel> build_model(ModelKind kind, std::size_t features,
                                         const ModelHyperparams& hp, bool feature_norm,
                                         std::uint64_t seed) {
  using namespace detail;
  switch (kind) {
    case ModelKind::SLearner: return std::make_unique<SLearner>(features, hp, feature_norm, seed);
    case ModelKind::TLearner: return std::make_unique<TLearner>(features, hp, feature_norm, seed);
    case ModelKind::BNN: return std::make_unique<Bnn>(features, hp, feature_norm, seed);
    case ModelKind::TARNet:
    case ModelKind::CFRNet:
      return std::make_unique<TarNet>(kind, features, hp, feature_norm, seed);
    case ModelKind::CEVAE: return std::make_unique<Cevae>(features, hp, feature_norm, seed);
    case ModelKind::GANITE: return std::make_unique<Ganite>(features, hp, feature_norm, seed);
    case ModelKind::DragonNet: return std::make_unique<DragonNet>(features, hp, feature_norm, seed);
    case ModelKind::FlexTENet: return std::make_unique<FlexTENet>(features, hp, feature_norm, seed);
    case ModelKind::SNet: return std::make_unique<SNet>(features, hp, feature_norm, seed);
    case ModelKind::EUEN: return std::make_unique<Euen>(features, hp, feature_norm, seed);
    case ModelKind::DESCN: return std::make_unique<Descn>(features, hp, feature_norm, seed);
    case ModelKind::EFIN: return std::make_unique<Efin>(features, hp, feature_norm, seed);
  }
  throw ConfigError("unknown model kind");
}

}  // namespace upbench::models
