use chefs_hat::agents::{Agent, FirstLegalAgent, RandomAgent};
use chefs_hat::cards::DeckConfig;
use chefs_hat::harness;
use chefs_hat::log::{
    export_dataset, replay, write_dataset_csv, DatasetFilter, Event, EventRecord, JsonlWriter, LogError, LogFile,
    LogHeader,
};
use chefs_hat::rewards::RewardSpec;

fn record_log(config: &DeckConfig, reward: &RewardSpec, seed: u64, games: u32) -> Vec<u8> {
    let header = LogHeader::new(config, reward, seed, games);
    let mut writer = JsonlWriter::new(Vec::new(), &header).unwrap();
    let mut roster: Vec<RandomAgent> = (0..4).map(|s| RandomAgent::new(seed + s)).collect();
    let mut seats: Vec<&mut dyn Agent> = roster.iter_mut().map(|a| a as &mut dyn Agent).collect();
    harness::run_match(&mut seats, config, reward, seed, games, &mut writer).unwrap();
    writer.into_inner().unwrap()
}

fn parse(bytes: &[u8]) -> LogFile {
    LogFile::parse(bytes).unwrap()
}

#[test]
fn one_game_has_one_start_and_one_end() {
    let log = parse(&record_log(&DeckConfig::default(), &RewardSpec::RulesLearning, 3, 1));
    let starts = log.records.iter().filter(|(_, r)| matches!(r.event, Event::GameStart { .. })).count();
    let ends = log.records.iter().filter(|(_, r)| matches!(r.event, Event::GameEnd { .. })).count();
    assert_eq!((starts, ends), (1, 1));
}

#[test]
fn proposals_are_plays_plus_wrong_actions() {
    let log = parse(&record_log(&DeckConfig::default(), &RewardSpec::RulesLearning, 4, 2));
    let proposals = log.records.iter().filter(|(_, r)| matches!(r.event, Event::Proposal { .. })).count();
    let wrong = log.records.iter().filter(|(_, r)| matches!(r.event, Event::Proposal { valid: false, .. })).count();
    let plays = log.records.iter().filter(|(_, r)| matches!(r.event, Event::Play { .. })).count();
    assert_eq!(proposals, plays + wrong);
    let report = replay(&log).unwrap();
    let tallied: u64 = report.games.iter().map(|g| g.accepted_plays).sum();
    assert_eq!(tallied as usize, plays);
}

#[test]
fn every_variant_and_reward_replays() {
    for variant in harness::VARIANTS {
        let config = DeckConfig::variant(variant).unwrap();
        for reward in [RewardSpec::RulesLearning, RewardSpec::WinGame, RewardSpec::WinLiteral] {
            let log = parse(&record_log(&config, &reward, 11, 2));
            let report = replay(&log).unwrap();
            let recorded: Vec<Vec<u32>> = log
                .records
                .iter()
                .filter_map(|(_, r)| match &r.event {
                    Event::GameEnd { scores, .. } => Some(scores.clone()),
                    _ => None,
                })
                .collect();
            let replayed: Vec<Vec<u32>> = report.games.iter().map(|g| g.scores.clone()).collect();
            assert_eq!(recorded, replayed, "{variant} / {}", reward.name());
        }
    }
}

#[test]
fn tampered_exchange_and_scores_are_caught() {
    let bytes = record_log(&DeckConfig::default(), &RewardSpec::RulesLearning, 5, 2);
    let text = String::from_utf8(bytes).unwrap();
    let lines: Vec<&str> = text.lines().collect();

    let end = lines.iter().position(|l| l.contains("\"kind\":\"gameEnd\"")).unwrap();
    let mut record: EventRecord = serde_json::from_str(lines[end]).unwrap();
    if let Event::GameEnd { scores, .. } = &mut record.event {
        scores[0] += 1;
    }
    let mut edited: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    edited[end] = serde_json::to_string(&record).unwrap();
    match replay(&LogFile::parse(edited.join("\n").as_bytes()).unwrap()) {
        Err(LogError::Divergence { line, .. }) => assert_eq!(line, end + 1),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn config_mismatch_is_refused() {
    let bytes = record_log(&DeckConfig::default(), &RewardSpec::RulesLearning, 6, 1);
    let text = String::from_utf8(bytes).unwrap();
    let edited = text.replacen("\"useJoker\":true", "\"useJoker\":false", 1);
    assert!(matches!(
        replay(&LogFile::parse(edited.as_bytes()).unwrap()),
        Err(LogError::ConfigMismatch { line: 2, .. })
    ));
}

#[test]
fn garbage_lines_are_malformed() {
    let bytes = record_log(&DeckConfig::default(), &RewardSpec::RulesLearning, 6, 1);
    let mut text = String::from_utf8(bytes).unwrap();
    text.push_str("{\"game\": oops}\n");
    let lines = text.lines().count();
    assert!(matches!(LogFile::parse(text.as_bytes()), Err(LogError::Malformed { line, .. }) if line == lines));
}

#[test]
fn dataset_row_counts_match_the_log() {
    let log = parse(&record_log(&DeckConfig::default(), &RewardSpec::RulesLearning, 8, 1));
    let plays = log.records.iter().filter(|(_, r)| matches!(r.event, Event::Play { .. })).count();
    let proposals = log.records.iter().filter(|(_, r)| matches!(r.event, Event::Proposal { .. })).count();
    let accepted = export_dataset(&log, DatasetFilter::AcceptedPlays).unwrap();
    let all = export_dataset(&log, DatasetFilter::AllProposals).unwrap();
    assert_eq!(accepted.len(), plays);
    assert_eq!(all.len(), proposals);
    assert!(all.iter().flat_map(|r| r.observation.iter()).all(|&x| (0.0..1.0).contains(&x)));

    let mut csv = Vec::new();
    write_dataset_csv(&mut csv, &accepted).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("formatVersion,game,seat,actionId,valid,reward,obs0,"));
    assert_eq!(text.lines().count(), plays + 1);
}

#[test]
fn export_is_stable_under_rewriting_the_replay() {
    // Replaying a log with deterministic agents and logging again gives the same dataset.
    let config = DeckConfig::default();
    let header = LogHeader::new(&config, &RewardSpec::WinGame, 9, 2);
    let mut writer = JsonlWriter::new(Vec::new(), &header).unwrap();
    let mut roster = vec![FirstLegalAgent; 4];
    let mut seats: Vec<&mut dyn Agent> = roster.iter_mut().map(|a| a as &mut dyn Agent).collect();
    harness::run_match(&mut seats, &config, &RewardSpec::WinGame, 9, 2, &mut writer).unwrap();
    let first = parse(&writer.into_inner().unwrap());

    let mut writer = JsonlWriter::new(Vec::new(), &header).unwrap();
    for (_, record) in &first.records {
        use chefs_hat::log::EventSink;
        writer.record(record).unwrap();
    }
    let second = parse(&writer.into_inner().unwrap());
    assert_eq!(
        export_dataset(&first, DatasetFilter::AllProposals).unwrap(),
        export_dataset(&second, DatasetFilter::AllProposals).unwrap()
    );
}
