//! Shared fixtures for unit tests: a six-passage corpus with gold and
//! system annotations exercising all seven error types.

use crate::model::{Annotation, AnswerSet, Edit, FineErrorType, Passage, PassageSet};

pub fn passage_0011_1() -> Passage {
    Passage::new(
        "0011-1",
        "关于瑞典时装公司HM拒绝使用新疆产品的言轮在华引发广泛声讨和抵制浪潮，有记者就此提问。华春莹标识：",
    )
    .unwrap()
}

pub fn passage_0011_2() -> Passage {
    Passage::new("0011-2", "新疆棉花是世界上最好的棉花之一，不用是相关企业的损失；").unwrap()
}

pub fn passage_0011_3() -> Passage {
    Passage::new(
        "0011-3",
        "给老百姓包括少数民族群众提更多的就业机会，一般正常人都都会觉得是件好事。",
    )
    .unwrap()
}

pub fn passage_0011_4() -> Passage {
    Passage::new("0011-4", "因为他们自己上历史真的就这么干了上百年，所以现在以己度人；").unwrap()
}

pub fn passage_0023_1() -> Passage {
    Passage::new("0023-1", "对学校的未来发展，专家们提出了许多真知灼见的意见。").unwrap()
}

pub fn passage_0069_1() -> Passage {
    Passage::new("0069-1", "高速公路上交通事故的主要原因是司机违反交通规则或操作不当造成的。").unwrap()
}

pub fn passages() -> PassageSet {
    let mut set = PassageSet::new();
    for p in [
        passage_0011_1(),
        passage_0011_2(),
        passage_0011_3(),
        passage_0011_4(),
        passage_0023_1(),
        passage_0069_1(),
    ] {
        set.insert(p).unwrap();
    }
    set
}

pub fn gold_0011_1() -> Annotation {
    Annotation::new(
        "0011-1",
        vec![
            Edit::new(20, FineErrorType::Character, "轮", "论"),
            Edit::new(46, FineErrorType::Word, "标识", "表示"),
        ],
    )
}

pub fn gold_0011_3() -> Annotation {
    Annotation::new(
        "0011-3",
        vec![
            Edit::new(13, FineErrorType::Missing, "", "供"),
            Edit::new(27, FineErrorType::Redundant, "都", ""),
        ],
    )
}

pub fn gold_0011_4() -> Annotation {
    Annotation::new(
        "0011-4",
        vec![Edit::new(6, FineErrorType::Disordered, "上历史", "历史上")],
    )
}

pub fn gold_0023_1() -> Annotation {
    Annotation::new(
        "0023-1",
        vec![Edit::new(21, FineErrorType::SemanticRepetition, "的意见", "")],
    )
}

pub fn gold_0069_1() -> Annotation {
    Annotation::new(
        "0069-1",
        vec![Edit::new(28, FineErrorType::SyntacticHybridity, "造成的", "")],
    )
}

pub fn gold() -> AnswerSet {
    let mut set = AnswerSet::new();
    for a in [
        gold_0011_1(),
        Annotation::empty("0011-2"),
        gold_0011_3(),
        gold_0011_4(),
        gold_0023_1(),
        gold_0069_1(),
    ] {
        set.insert(a).unwrap();
    }
    set
}

pub fn system() -> AnswerSet {
    let mut set = AnswerSet::new();
    for a in [
        Annotation::new(
            "0011-1",
            vec![Edit::new(20, FineErrorType::Character, "轮", "语")],
        ),
        Annotation::empty("0011-2"),
        Annotation::new(
            "0011-3",
            vec![
                Edit::new(26, FineErrorType::Redundant, "都", ""),
                Edit::new(32, FineErrorType::Character, "件", "个"),
            ],
        ),
        Annotation::new(
            "0011-4",
            vec![Edit::new(6, FineErrorType::Redundant, "上", "")],
        ),
        Annotation::empty("0023-1"),
        Annotation::new(
            "0069-1",
            vec![Edit::new(28, FineErrorType::SyntacticHybridity, "造成的", "")],
        ),
    ] {
        set.insert(a).unwrap();
    }
    set
}

pub const CORRECTED_0011_3: &str =
    "给老百姓包括少数民族群众提供更多的就业机会，一般正常人都会觉得是件好事。";

pub const CORRECTED_0011_4: &str = "因为他们自己历史上真的就这么干了上百年，所以现在以己度人；";
