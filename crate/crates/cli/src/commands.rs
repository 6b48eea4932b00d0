use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use hedonic_core::convnet::{self, train_cnn, CnnHyper, CnnModel};
use hedonic_core::corpus::{freq_dist, ingest, load_lexicon, write_posts, Lexicon, Post};
use hedonic_core::feedsim::{consume, estimate_sampling, FeedServer, LimitNotice, ServerConfig};
use hedonic_core::hedonometer::{hashtag_table, timeseries, HashtagSort, Lens};
use hedonic_core::modelfile::ModelFile;
use hedonic_core::relevance::{self, read_labeled, train_logistic, LogisticHyper, TfIdfLogisticModel};
use hedonic_core::report::{self, header, NA};
use hedonic_core::sift::apply_filters;
use hedonic_core::wordshift::{render_svg, render_text, shift};
use hedonic_core::{run_cohort, Error, PipelineConfig};

use crate::{CliError, CliResult, Command, FilterFlags, LexiconFlags, LexiconLayout, ModelKind};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn set(cfg: &mut PipelineConfig, key: &str, value: &str) -> CliResult {
    cfg.set(key, value, 0).map_err(|e| usage(e.to_string()))
}

fn apply_filter_flags(cfg: &mut PipelineConfig, f: &FilterFlags) -> CliResult {
    if f.keep_urls {
        cfg.filter.drop_urls = false;
    }
    if f.keep_retweets {
        cfg.filter.drop_retweets = false;
    }
    if let Some(langs) = &f.langs {
        set(cfg, "allowed_langs", langs)?;
    }
    if let Some(q) = &f.query {
        set(cfg, "keyword_query", q)?;
    }
    Ok(())
}

fn apply_lexicon_flags(cfg: &mut PipelineConfig, f: &LexiconFlags) -> CliResult {
    if let Some(p) = &f.lexicon {
        cfg.lexicon_path = Some(p.clone());
    }
    if let Some(layout) = f.lexicon_format {
        set(
            cfg,
            "lexicon_format",
            match layout {
                LexiconLayout::Pairs => "pairs",
                LexiconLayout::Labmt => "labmt",
            },
        )?;
    }
    if let Some(c) = f.lens_center {
        cfg.lens.center = c;
    }
    if let Some(d) = f.lens_delta {
        cfg.lens.delta = d;
    }
    if f.no_lens {
        cfg.lens = Lens::NONE;
    }
    Ok(())
}

fn lexicon(cfg: &PipelineConfig) -> CliResult<Lexicon> {
    let path = cfg
        .lexicon_path
        .as_ref()
        .ok_or_else(|| usage("a lexicon is required (--lexicon or lexicon = ... in the config)"))?;
    Ok(load_lexicon(path, cfg.lexicon_format)?)
}

fn emit(output: Option<&Path>, text: &str) -> CliResult {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Data(Error::Stream(e))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Data(Error::Stream(e))),
    }
}

fn write_post_file(path: &Path, posts: &[Post]) -> CliResult {
    let file = File::create(path).map_err(|e| CliError::Data(Error::Stream(e)))?;
    let mut out = BufWriter::new(file);
    write_posts(&mut out, posts)?;
    out.flush().map_err(|e| CliError::Data(Error::Stream(e)))
}

fn terms(list: &Option<String>) -> Vec<String> {
    list.as_deref()
        .unwrap_or("")
        .split(',')
        .map(|t| t.trim().to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn run(command: Command, mut cfg: PipelineConfig) -> CliResult {
    match command {
        Command::Sift { input, output, filter } => {
            apply_filter_flags(&mut cfg, &filter)?;
            let posts = ingest(&input)?;
            let (kept, rep) = apply_filters(&posts, &cfg.filter);
            write_post_file(&output, &kept)?;
            eprint!("{}", report::filter_report_tsv(&rep));
            Ok(())
        }

        Command::Happiness {
            input,
            lexicon: lex_flags,
            bin,
            output,
        } => {
            apply_lexicon_flags(&mut cfg, &lex_flags)?;
            if let Some(b) = bin {
                set(&mut cfg, "bin", &b)?;
            }
            let lex = lexicon(&cfg)?;
            let posts = ingest(&input)?;
            let series = timeseries(&posts, &lex, cfg.lens, cfg.bin);
            emit(output.as_deref(), &report::timeseries_tsv(&series, cfg.bin))
        }

        Command::Shift {
            reference,
            comparison,
            lexicon: lex_flags,
            top,
            svg,
            output,
        } => {
            apply_lexicon_flags(&mut cfg, &lex_flags)?;
            let lex = lexicon(&cfg)?;
            let r = ingest(&reference)?;
            let c = ingest(&comparison)?;
            let ws = shift(&freq_dist(&r), &freq_dist(&c), &lex, cfg.lens)?;
            if let Some(path) = svg {
                fs::write(&path, render_svg(&ws, top)).map_err(|e| CliError::Data(Error::Stream(e)))?;
            }
            emit(output.as_deref(), &render_text(&ws, top))
        }

        Command::Train {
            kind,
            input,
            model_out,
            seed,
            lr,
            epochs,
            l2,
            alpha,
            embed_dim,
            widths,
            filters,
            dropout_keep,
            batch_size,
            max_len,
        } => {
            let file = File::open(&input).map_err(|e| CliError::Data(Error::Stream(e)))?;
            let examples = read_labeled(BufReader::new(file))?;
            match kind {
                ModelKind::Logistic => {
                    let mut hyper = LogisticHyper {
                        seed,
                        ..LogisticHyper::default()
                    };
                    if let Some(v) = lr {
                        hyper.lr = v;
                    }
                    if let Some(v) = epochs {
                        hyper.epochs = v;
                    }
                    if let Some(v) = l2 {
                        hyper.l2_lambda = v;
                    }
                    if let Some(a) = alpha {
                        hyper.alpha = Some(a.parse().map_err(usage)?);
                    }
                    let (model, rep) = train_logistic(&examples, &hyper).map_err(CliError::Model)?;
                    model.save(&model_out).map_err(CliError::Model)?;
                    let mut out = header(&["kind", "train_examples", "epochs_run", "final_loss", "train_accuracy"]);
                    out.push_str(&format!(
                        "logistic\t{}\t{}\t{:.6}\t{:.6}\n",
                        rep.train_examples,
                        rep.losses.len(),
                        rep.losses.last().copied().unwrap_or(f64::NAN),
                        rep.train_accuracy
                    ));
                    emit(None, &out)
                }
                ModelKind::Cnn => {
                    let mut hyper = CnnHyper {
                        seed,
                        ..CnnHyper::default()
                    };
                    if let Some(v) = lr {
                        hyper.lr = v;
                    }
                    if let Some(v) = epochs {
                        hyper.epochs = v;
                    }
                    if let Some(v) = embed_dim {
                        hyper.embed_dim = v;
                    }
                    if let Some(w) = widths {
                        hyper.filter_widths = w
                            .split(',')
                            .map(|x| x.trim().parse::<usize>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| usage(format!("--widths: {e}")))?;
                    }
                    if let Some(v) = filters {
                        hyper.filters_per_width = v;
                    }
                    if let Some(v) = dropout_keep {
                        hyper.dropout_keep = v;
                    }
                    if let Some(v) = batch_size {
                        hyper.batch_size = v;
                    }
                    if let Some(v) = max_len {
                        hyper.max_len = v;
                    }
                    let (model, rep) = train_cnn(&examples, &hyper).map_err(CliError::Model)?;
                    model.save(&model_out).map_err(CliError::Model)?;
                    let mut out = header(&["epoch", "mean_loss", "train_accuracy", "eval_accuracy"]);
                    for e in &rep.epochs {
                        let eval = e.eval_accuracy.map_or(NA.to_string(), |a| format!("{a:.6}"));
                        out.push_str(&format!(
                            "{}\t{:.6}\t{:.6}\t{eval}\n",
                            e.epoch, e.mean_loss, e.train_accuracy
                        ));
                    }
                    emit(None, &out)
                }
            }
        }

        Command::Predict {
            model,
            input,
            text,
            output,
        } => {
            let classifier = Classifier::load(&model)?;
            let mut out = header(&["id", "label", "probability"]);
            match (input, text) {
                (_, Some(t)) => {
                    let (label, p) = classifier.predict(&t);
                    out.push_str(&format!("-\t{label}\t{p:.6}\n"));
                }
                (Some(path), None) => {
                    for post in ingest(&path)? {
                        let (label, p) = classifier.predict(post.text());
                        out.push_str(&format!("{}\t{label}\t{p:.6}\n", post.id));
                    }
                }
                (None, None) => return Err(usage("either --input or --text is required")),
            }
            emit(output.as_deref(), &out)
        }

        Command::Cohort {
            input,
            logistic_model,
            cnn_model,
            output,
            users,
            filter,
        } => {
            apply_filter_flags(&mut cfg, &filter)?;
            let rel_path = logistic_model
                .or(cfg.logistic_model.clone())
                .ok_or_else(|| usage("--logistic-model is required"))?;
            let cnn_path = cnn_model
                .or(cfg.cnn_model.clone())
                .ok_or_else(|| usage("--cnn-model is required"))?;
            let rel = TfIdfLogisticModel::load(&rel_path).map_err(CliError::Model)?;
            let cnn = CnnModel::load(&cnn_path).map_err(CliError::Model)?;
            let posts = ingest(&input)?;
            let (cohort, rep) = run_cohort(&posts, &cfg.filter, &rel, &cnn);
            write_post_file(&output, &cohort)?;
            if let Some(path) = users {
                emit(Some(&path), &report::cohort_users_tsv(&rep))?;
            }
            emit(None, &report::cohort_funnel_tsv(&rep))
        }

        Command::Hashtags {
            input,
            lexicon: lex_flags,
            top_k,
            sort,
            output,
        } => {
            apply_lexicon_flags(&mut cfg, &lex_flags)?;
            if let Some(k) = top_k {
                set(&mut cfg, "top_k", &k.to_string())?;
            }
            let sort: HashtagSort = sort.parse().map_err(usage)?;
            let lex = lexicon(&cfg)?;
            let posts = ingest(&input)?;
            let table = hashtag_table(&posts, &lex, cfg.lens, cfg.top_k, sort);
            emit(output.as_deref(), &report::hashtag_tsv(&table))
        }

        Command::Serve {
            input,
            host,
            port,
            cap,
            query,
            pace,
            clients,
        } => {
            if cap < 1 {
                return Err(usage("--cap must be at least 1"));
            }
            let posts = ingest(&input)?;
            let config = ServerConfig {
                rate_cap: cap,
                keyword_query: terms(&query),
                pace,
            };
            let server = FeedServer::bind(format!("{host}:{port}"), &posts, &config)?;
            let t = server.tally();
            eprintln!(
                "listening on {} (matching {}, delivered {}, withheld {} per session)",
                server.local_addr()?,
                t.matching,
                t.delivered,
                t.withheld
            );
            server.serve(clients)?;
            Ok(())
        }

        Command::Consume { address, output } => {
            let (stats, _) = consume(address.as_str(), &output)?;
            let mut out = header(&["collected", "limit_sum", "notices", "estimated_rho"]);
            let rho = stats.estimated_rho.map_or(NA.to_string(), |r| format!("{r:.6}"));
            out.push_str(&format!("{}\t{}\t{}\t{rho}\n", stats.collected, stats.limit_sum, stats.notices));
            emit(None, &out)
        }

        Command::SampleRate { collected, withheld } => {
            let limits = withheld
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<u64>()
                        .map(|w| LimitNotice {
                            timestamp: 0,
                            withheld: w,
                        })
                        .map_err(|_| usage(format!("withheld count {s:?} is not a nonnegative integer")))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let rho = estimate_sampling(collected, &limits)?;
            let mut out = header(&["collected", "limit_sum", "estimated_rho"]);
            let sum: u64 = limits.iter().map(|l| l.withheld).sum();
            out.push_str(&format!("{collected}\t{sum}\t{rho:.6}\n"));
            emit(None, &out)
        }
    }
}

enum Classifier {
    Logistic(TfIdfLogisticModel),
    Cnn(CnnModel),
}

impl Classifier {
    fn load(path: &PathBuf) -> CliResult<Classifier> {
        let file = ModelFile::load(path).map_err(CliError::Model)?;
        match file.kind.as_str() {
            relevance::MODEL_KIND => Ok(Classifier::Logistic(
                TfIdfLogisticModel::from_model_file(&file).map_err(CliError::Model)?,
            )),
            convnet::MODEL_KIND => Ok(Classifier::Cnn(
                CnnModel::from_model_file(&file).map_err(CliError::Model)?,
            )),
            other => Err(CliError::Model(Error::ModelFormat(format!("unknown model kind {other:?}")))),
        }
    }

    fn predict(&self, text: &str) -> (&'static str, f64) {
        match self {
            Classifier::Logistic(m) => {
                let p = m.predict(text);
                let label = match p.label {
                    relevance::Label::Relevant => "relevant",
                    relevance::Label::Unrelated => "unrelated",
                };
                (label, p.probability)
            }
            Classifier::Cnn(m) => {
                let p = m.predict(text);
                let label = match p.label {
                    hedonic_core::Diagnosis::Diagnostic => "diagnostic",
                    hedonic_core::Diagnosis::Other => "other",
                };
                (label, p.probability)
            }
        }
    }
}
