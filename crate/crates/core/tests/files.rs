use addlam_core::corpus::generate_corpus;
use addlam_core::files::{read_proof, write_proof, FileError, Proof};
use addlam_core::translate::trans_term;

#[test]
fn corpus_derivations_survive_files() {
    let corpus = generate_corpus(5, 60, 14);
    for e in &corpus.entries {
        let add = Proof::Add(e.add.clone());
        assert_eq!(read_proof(&write_proof(&add)).unwrap(), add, "{}", e.id);
        if let Some(s) = &e.sadd {
            let sadd = Proof::Sadd(s.clone());
            assert_eq!(read_proof(&write_proof(&sadd)).unwrap(), sadd, "{}", e.id);
            let f = Proof::F(trans_term(s).fderivation);
            assert_eq!(read_proof(&write_proof(&f)).unwrap(), f, "{}", e.id);
        }
    }
}

#[test]
fn malformed_files_are_rejected() {
    assert!(matches!(read_proof("{"), Err(FileError::Json(_))));
    let bad_type = r#"{"system":"add","ctx":{"a":"A ->"},"term":"a","type":"A","proof":{"rule":"ax","var":"a"}}"#;
    assert!(matches!(read_proof(bad_type), Err(FileError::Syntax { .. })));
    let wrong_root = r#"{"system":"add","ctx":{"a":"A"},"term":"b","type":"A","proof":{"rule":"ax","var":"a"}}"#;
    assert!(read_proof(wrong_root).is_err());
    let undeclared = r#"{"system":"add","ctx":{"a":"A"},"term":"b","type":"A","proof":{"rule":"ax","var":"b"}}"#;
    assert!(read_proof(undeclared).is_err());
}
