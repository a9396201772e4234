"""Pipeline orchestration shared by the CLI subcommands.

Each runner consumes a RunConfig, writes its artifacts under the configured
output directory, and returns a small summary dict for the caller to print.
"""

from __future__ import annotations

import os

import numpy as np

from . import dataset, embedding, metrics, multilabel, projection, propagation, report
from .config import RunConfig
from .dataset import LabelVocabulary, PrototypeSet
from .errors import ConfigError, InvalidParameter, ShapeError


def _view_names(cfg: RunConfig) -> list[str]:
    names = cfg.semantic_view_names()
    if not names:
        raise ConfigError("config key 'semantic_views' must name at least one view")
    return names


def _load_zsl_inputs(cfg: RunConfig):
    aux_X = dataset.load_matrix(cfg.path("aux_features"), view_name="features")
    views = {}
    protos = {}
    for name in _view_names(cfg):
        views[name] = dataset.load_matrix(cfg.path(f"aux_semantics_{name}"),
                                          view_name=name)
        protos[name] = dataset.load_prototypes(cfg.path(f"prototypes_{name}"))
    tgt_X = dataset.load_matrix(cfg.path("target_features"), view_name="features")
    labels = None
    if cfg.optional_path("target_labels"):
        labels = dataset.load_labels(cfg.path("target_labels"))
    return aux_X, views, protos, tgt_X, labels


def validate_inputs(cfg: RunConfig) -> list[str]:
    """Check that configured inputs exist, parse, and agree in shape."""
    lines = []
    mode = "zsl" if cfg.get("semantic_views") else "mlzsl"
    if mode == "zsl":
        aux_X, views, protos, tgt_X, labels = _load_zsl_inputs(cfg)
        lines.append(f"aux_features: {aux_X.rows} x {aux_X.cols}")
        for name, mat in views.items():
            if mat.rows != aux_X.rows:
                raise ConfigError(
                    f"aux_semantics_{name} has {mat.rows} rows, expected {aux_X.rows}"
                )
            if protos[name].space_dim != mat.cols:
                raise ConfigError(
                    f"prototypes_{name} dim {protos[name].space_dim} != view dim {mat.cols}"
                )
            lines.append(f"aux_semantics_{name}: {mat.rows} x {mat.cols}, "
                         f"{len(protos[name])} prototypes")
        if tgt_X.cols != aux_X.cols:
            raise ConfigError(
                f"target_features has {tgt_X.cols} columns, expected {aux_X.cols}"
            )
        lines.append(f"target_features: {tgt_X.rows} x {tgt_X.cols}")
        if labels is not None:
            if len(labels) != tgt_X.rows:
                raise ConfigError(
                    f"target_labels has {len(labels)} lines, expected {tgt_X.rows}"
                )
            lines.append(f"target_labels: {len(labels)} lines")
    else:
        aux_X = dataset.load_matrix(cfg.path("aux_features"))
        lines.append(f"aux_features: {aux_X.rows} x {aux_X.cols}")
        wv = dataset.load_word_vectors(cfg.path("word_vectors"))
        lines.append(f"word_vectors: {len(wv.entries)} tokens, dim {wv.dim}")
        vocab = dataset.load_labels(cfg.path("label_vocab"))
        missing = [v for v in vocab if v not in wv]
        if missing:
            raise ConfigError(f"labels without word vectors: {missing}")
        lines.append(f"label_vocab: {len(vocab)} labels")
        tgt_X = dataset.load_matrix(cfg.path("target_features"))
        lines.append(f"target_features: {tgt_X.rows} x {tgt_X.cols}")
    return lines


def fit_projection_models(cfg: RunConfig):
    """Fit one ridge model per semantic view on the auxiliary data."""
    aux_X = dataset.load_matrix(cfg.path("aux_features"))
    lam = cfg.get_float("ridge_lambda")
    normalize = cfg.get("normalize")
    fit_bias = cfg.get_bool("fit_bias")
    models = {}
    for name in _view_names(cfg):
        aux_S = dataset.load_matrix(cfg.path(f"aux_semantics_{name}"))
        if aux_S.rows != aux_X.rows:
            raise ShapeError(
                f"aux_semantics_{name} has {aux_S.rows} rows, expected {aux_X.rows}"
            )
        models[name] = projection.fit_ridge(
            aux_X, aux_S, lam, normalize=normalize, fit_bias=fit_bias
        )
    return models


def _embedding_views(cfg: RunConfig, models, tgt_X):
    """Normalized target features plus each view's projected semantics."""
    first = next(iter(models.values()))
    Xt_norm = (tgt_X.data - first.input_mean) / first.input_scale
    mats = [Xt_norm]
    for name in models:
        mats.append(projection.apply(models[name], tgt_X).data)
    return mats


def fit_embedding_model(cfg: RunConfig):
    models = fit_projection_models(cfg)
    tgt_X = dataset.load_matrix(cfg.path("target_features"))
    mats = _embedding_views(cfg, models, tgt_X)
    m = cfg.get_int("cca_dim") or None
    reg = cfg.get_float("cca_reg") or None
    cca = embedding.fit_mvcca(mats, m=m, reg=reg,
                              weight_power=cfg.get_float("weight_power"))
    return models, cca, mats


def run_fit_projection(cfg: RunConfig) -> list[str]:
    outdir = cfg.path("output_dir")
    report.ensure_dir(outdir)
    models = fit_projection_models(cfg)
    lines = []
    for name, model in models.items():
        path = os.path.join(outdir, f"projection_{name}.model")
        projection.save_model(model, path)
        lines.append(f"projection_{name}: {model.d_in} -> {model.d_out}, "
                     f"lambda {model.lam}, saved {path}")
    return lines


def run_fit_embedding(cfg: RunConfig) -> list[str]:
    outdir = cfg.path("output_dir")
    report.ensure_dir(outdir)
    models, cca, _ = fit_embedding_model(cfg)
    path = os.path.join(outdir, "cca_model")
    embedding.save_cca(cca, path)
    rho = ", ".join(f"{r:.4f}" for r in cca.rho)
    return [
        f"views: {cca.n_views} (features + {', '.join(models)})",
        f"embedding dim: {cca.m}",
        f"canonical correlations: {rho}",
        f"saved {path}",
    ]


def run_export_embedding(cfg: RunConfig) -> list[str]:
    outdir = cfg.path("output_dir")
    report.ensure_dir(outdir)
    models, cca, mats = fit_embedding_model(cfg)
    names = ["features"] + list(models)
    lines = []
    for i, (name, mat) in enumerate(zip(names, mats)):
        coords = embedding.embed(cca, mat, i)
        path = os.path.join(outdir, f"embedded_{name}.csv")
        dataset.write_matrix(coords, path)
        lines.append(f"embedded_{name}: {coords.rows} x {coords.cols} -> {path}")
    for i, name in enumerate(models, start=1):
        protos = dataset.load_prototypes(cfg.path(f"prototypes_{name}"))
        embedded = embedding.embed_prototypes(cca, protos, i)
        path = os.path.join(outdir, f"embedded_prototypes_{name}.csv")
        dataset.write_prototypes(embedded, path)
        lines.append(f"embedded_prototypes_{name}: {len(embedded)} -> {path}")
    return lines


def _aligned_prototypes(protos: dict[str, PrototypeSet]) -> list[tuple[str, ...]]:
    label_sets = None
    for name, p in protos.items():
        if label_sets is None:
            label_sets = p.label_sets
        elif p.label_sets != label_sets:
            raise ConfigError(f"prototype label sets of view {name!r} disagree")
    return label_sets


def run_zsl(cfg: RunConfig) -> dict:
    """Full transductive multi-view pipeline on precomputed features."""
    outdir = cfg.path("output_dir")
    report.ensure_dir(outdir)
    aux_X, view_mats, protos, tgt_X, truth = _load_zsl_inputs(cfg)
    _aligned_prototypes(protos)

    models = fit_projection_models(cfg)
    mats = _embedding_views(cfg, models, tgt_X)
    m = cfg.get_int("cca_dim") or None
    reg = cfg.get_float("cca_reg") or None
    cca = embedding.fit_mvcca(mats, m=m, reg=reg,
                              weight_power=cfg.get_float("weight_power"))

    embedded_views = [embedding.embed(cca, mat, i).data for i, mat in enumerate(mats)]
    embedded_protos = []
    for i, name in enumerate(models, start=1):
        embedded_protos.append(embedding.embed_prototypes(cca, protos[name], i))
    # the feature view has no native prototypes; use the mean of the semantic
    # views' embedded prototypes (all views share the latent space)
    label_sets = embedded_protos[0].label_sets
    mean_vectors = np.mean([p.vectors for p in embedded_protos], axis=0)
    feature_protos = PrototypeSet(
        space_dim=cca.m,
        items=[(labels, mean_vectors[j]) for j, labels in enumerate(label_sets)],
    )

    scores = propagation.tmv_hlp(
        embedded_views,
        [feature_protos] + embedded_protos,
        k=cfg.get_int("knn_k"),
        alpha=cfg.get_float("alpha"),
        sigma=cfg.get("sigma"),
        tol=cfg.get_float("tol"),
        max_iter=cfg.get_int("max_iter"),
    )
    preds = scores.predictions()

    propagation.write_scores_csv(scores, os.path.join(outdir, "scores.csv"))
    report.write_text("\n".join(preds) + "\n", os.path.join(outdir, "predictions.txt"))

    summary = {"n_instances": len(preds), "converged": scores.converged}
    metric = cfg.get("metric")
    baselines = {}
    for i, name in enumerate(models, start=1):
        direct = multilabel.dmp_predict(
            projection.apply(models[name], tgt_X), protos[name], metric=metric
        )
        baselines[name] = ["|".join(p) for p in direct]

    if truth is not None:
        rep = metrics.multiclass_accuracy(preds, truth)
        extra = {}
        for name, direct_preds in baselines.items():
            extra[f"direct_nearest_prototype_accuracy[{name}]"] = (
                metrics.multiclass_accuracy(direct_preds, truth).accuracy
            )
        report.write_text(report.multiclass_table(rep, extra),
                          os.path.join(outdir, "report.csv"))
        report.write_text(report.multiclass_text(rep, extra),
                          os.path.join(outdir, "report.txt"))
        summary["accuracy"] = rep.accuracy
        summary.update(extra)
        if cfg.get_bool("figures"):
            report.confusion_figure(rep, os.path.join(outdir, "confusion.png"))
            report.per_class_accuracy_figure(
                rep, os.path.join(outdir, "per_class_accuracy.png"))
            report.score_heatmap_figure(
                scores.F, scores.class_names,
                os.path.join(outdir, "scores_heatmap.png"))
    return summary


def _mlzsl_aux_targets(cfg: RunConfig, aux_X, wv):
    mode = cfg.get("synthesis_mode")
    key = None
    for name in cfg.semantic_view_names() or ["word"]:
        if cfg.optional_path(f"aux_semantics_{name}"):
            key = f"aux_semantics_{name}"
            break
    if key:
        aux_Y = dataset.load_matrix(cfg.path(key))
    elif cfg.optional_path("aux_label_sets"):
        sets = dataset.load_label_sets(cfg.path("aux_label_sets"))
        aux_Y = dataset.FeatureMatrix(
            np.vstack([multilabel.synth_prototype(s, wv, mode) for s in sets])
        )
    elif cfg.optional_path("aux_labels"):
        names = dataset.load_labels(cfg.path("aux_labels"))
        aux_Y = dataset.FeatureMatrix(
            np.vstack([wv.vector(n) for n in names])
        )
    else:
        raise ConfigError(
            "mlzsl needs aux_semantics_<view>, aux_label_sets, or aux_labels"
        )
    if aux_Y.rows != aux_X.rows:
        raise ShapeError(f"aux targets have {aux_Y.rows} rows, expected {aux_X.rows}")
    return aux_Y


def run_mlzsl(cfg: RunConfig) -> dict:
    """Multi-label zero-shot prediction with power-set prototypes."""
    outdir = cfg.path("output_dir")
    report.ensure_dir(outdir)

    aux_X = dataset.load_matrix(cfg.path("aux_features"))
    wv = dataset.load_word_vectors(cfg.path("word_vectors"))
    vocab = LabelVocabulary(dataset.load_labels(cfg.path("label_vocab")),
                            role="target")
    tgt_X = dataset.load_matrix(cfg.path("target_features"))
    aux_Y = _mlzsl_aux_targets(cfg, aux_X, wv)

    model = projection.fit_ridge(
        aux_X, aux_Y, cfg.get_float("ridge_lambda"),
        normalize=cfg.get("normalize"), fit_bias=cfg.get_bool("fit_bias"),
    )
    protos = multilabel.power_set_prototypes(
        vocab, wv,
        max_cardinality=cfg.get_int("max_cardinality") or None,
        mode=cfg.get("synthesis_mode"),
        cap=cfg.get_int("subset_cap"),
    )

    rounds = cfg.get_int("self_train_rounds")
    if rounds > 0:
        model = multilabel.self_train_adapt(
            model, tgt_X, protos, rounds=rounds,
            keep_fraction=cfg.get_float("keep_fraction"),
            metric=cfg.get("metric"), aug_weight=cfg.get_float("aug_weight"),
            keep_rule=cfg.get("keep_rule"),
        )
    projected = projection.apply(model, tgt_X)

    space = cfg.get("space")
    if space == "embedding":
        Xt_norm = (tgt_X.data - model.input_mean) / model.input_scale
        cca = embedding.fit_mvcca(
            [Xt_norm, projected.data],
            m=cfg.get_int("cca_dim") or None,
            reg=cfg.get_float("cca_reg") or None,
            weight_power=cfg.get_float("weight_power"),
        )
        data = embedding.embed(cca, projected, 1).data
        pred_protos = embedding.embed_prototypes(cca, protos, 1)
    elif space == "word":
        data = projected.data
        pred_protos = protos
    else:
        raise ConfigError(f"unknown prediction space {space!r}")

    method = cfg.get("method")
    labels = sorted(vocab.names)
    if method == "dmp":
        sims = multilabel.prototype_scores(data, pred_protos, cfg.get("metric"))
        idx = np.argmax(sims, axis=1)
        preds = [pred_protos.label_sets[int(i)] for i in idx]
        subset_scores = sims
    elif method == "tramp":
        preds, score_obj = multilabel.tramp_predict(
            data, pred_protos,
            k=cfg.get_int("knn_k"), alpha=cfg.get_float("alpha"),
            sigma=cfg.get("sigma"), tol=cfg.get_float("tol"),
            max_iter=cfg.get_int("max_iter"), return_scores=True,
        )
        subset_scores = score_obj.F
    else:
        raise ConfigError(f"unknown method {method!r}")

    label_scores = multilabel.label_scores_from_subsets(
        subset_scores, pred_protos.label_sets, labels)

    report.write_text("\n".join("|".join(p) for p in preds) + "\n",
                      os.path.join(outdir, "predicted_labels.txt"))
    with open(os.path.join(outdir, "label_scores.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(",".join(labels) + "\n")
        for row in label_scores:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")

    summary = {
        "n_instances": len(preds),
        "n_prototypes": len(protos),
        "method": method,
        "space": space,
    }
    if cfg.optional_path("target_label_sets"):
        truth = dataset.load_label_sets(cfg.path("target_label_sets"))
        rep = metrics.multilabel_losses(
            label_scores, labels, truth, threshold=cfg.get("hamming_threshold"))
        report.write_text(report.multilabel_table(rep),
                          os.path.join(outdir, "report.csv"))
        report.write_text(report.multilabel_text(rep),
                          os.path.join(outdir, "report.txt"))
        summary.update({
            "hamming_loss": rep.hamming_loss,
            "ranking_loss": rep.ranking_loss,
            "one_error": rep.one_error,
            "coverage": rep.coverage,
        })
        if cfg.get_bool("figures"):
            report.multilabel_loss_figure(rep, os.path.join(outdir, "ml_losses.png"))
            report.score_heatmap_figure(
                label_scores, labels, os.path.join(outdir, "label_scores.png"))
    return summary


def run_synth(cfg: RunConfig) -> dict:
    """Generate a synthetic benchmark to disk, plus a ready-to-run config."""
    outdir = cfg.path("output_dir")
    report.ensure_dir(outdir)
    seed = cfg.seed()
    # aux classes must span the feature space or the auxiliary-fit
    # projection cannot generalize to target-class directions at all
    params = dict(
        n_aux_classes=cfg.get_int("synth_n_aux_classes", "20"),
        n_target_classes=cfg.get_int("synth_n_target_classes", "5"),
        per_class=cfg.get_int("synth_per_class", "50"),
        feat_dim=cfg.get_int("synth_feat_dim", "12"),
        sem_dim=cfg.get_int("synth_sem_dim", "10"),
    )
    extras = {}
    if "synth_cluster_std" in cfg.values:
        extras["cluster_std"] = cfg.get_float("synth_cluster_std")
    if "synth_min_separation" in cfg.values:
        extras["min_separation"] = cfg.get_float("synth_min_separation")

    shift = cfg.get_float("synth_shift_magnitude", "0")
    if "synth_shift_relative" in cfg.values:
        base = dataset.synth_benchmark(**params, shift_magnitude=0.0, seed=seed,
                                       **extras)
        shift = cfg.get_float("synth_shift_relative") * dataset.prototype_spacing(base)
    bench = dataset.synth_benchmark(**params, shift_magnitude=shift, seed=seed,
                                    **extras)

    dataset.write_matrix(bench.aux_features, os.path.join(outdir, "aux_features.csv"))
    dataset.write_matrix(bench.aux_semantics,
                         os.path.join(outdir, "aux_semantics_sem.csv"))
    dataset.write_labels(bench.aux_labels, os.path.join(outdir, "aux_labels.txt"))
    dataset.write_matrix(bench.target_features,
                         os.path.join(outdir, "target_features.csv"))
    dataset.write_labels(bench.target_true_labels,
                         os.path.join(outdir, "target_labels.txt"))
    dataset.write_word_vectors(bench.target_word_vectors,
                               os.path.join(outdir, "word_vectors.txt"))
    names = sorted(bench.target_word_vectors.entries)
    protos = PrototypeSet(
        space_dim=bench.target_word_vectors.dim,
        items=[((n,), bench.target_word_vectors.entries[n]) for n in names],
    )
    dataset.write_prototypes(protos, os.path.join(outdir, "prototypes_sem.csv"))
    dataset.write_labels(names, os.path.join(outdir, "label_vocab.txt"))

    zsl_cfg = "\n".join([
        "# generated benchmark run configuration",
        "aux_features = aux_features.csv",
        "aux_labels = aux_labels.txt",
        "semantic_views = sem",
        "aux_semantics_sem = aux_semantics_sem.csv",
        "prototypes_sem = prototypes_sem.csv",
        "target_features = target_features.csv",
        "target_labels = target_labels.txt",
        "word_vectors = word_vectors.txt",
        "label_vocab = label_vocab.txt",
        f"seed = {seed}",
        "output_dir = zsl_out",
    ]) + "\n"
    report.write_text(zsl_cfg, os.path.join(outdir, "zsl.config"))
    return {
        "outdir": outdir,
        "shift_magnitude": shift,
        "aux_instances": bench.aux_features.rows,
        "target_instances": bench.target_features.rows,
        "config": os.path.join(outdir, "zsl.config"),
    }
