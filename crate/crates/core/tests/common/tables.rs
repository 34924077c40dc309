// High-precision CDF values (50-digit quadrature), frozen.

#![allow(clippy::excessive_precision)]

pub const STUDENT_T_TABLE: [(f64, f64, f64); 64] = [
    (1.0, -6.5, 0.04858979034752893854),
    (1.0, -2.5, 0.12111894159084339872),
    (1.0, -1.0, 0.25),
    (1.0, -0.3, 0.40722642092225765968),
    (1.0, 0.0, 0.5),
    (1.0, 0.7, 0.69440011221421478),
    (1.0, 1.96, 0.84982855411198342532),
    (1.0, 4.0, 0.92202086962263067454),
    (2.0, -6.5, 0.01143008179816124456),
    (2.0, -2.5, 0.064805860110755404557),
    (2.0, -1.0, 0.21132486540518711775),
    (2.0, -0.3, 0.39624283042008880532),
    (2.0, 0.0, 0.5),
    (2.0, 0.7, 0.72180348768356725841),
    (2.0, 1.96, 0.90547134519913386521),
    (2.0, 4.0, 0.97140452079103168293),
    (3.0, -6.5, 0.0036972623182919139111),
    (3.0, -2.5, 0.043853323504032773625),
    (3.0, -1.0, 0.19550110947788532096),
    (3.0, -0.3, 0.39188164601995952115),
    (3.0, 0.0, 0.5),
    (3.0, 0.7, 0.73283650084761817348),
    (3.0, 1.96, 0.92757389571757317239),
    (3.0, 4.0, 0.98599577199492691652),
    (5.0, -6.5, 0.00064332655019998484084),
    (5.0, -2.5, 0.027245049671188120558),
    (5.0, -1.0, 0.1816087338245613128),
    (5.0, -0.3, 0.38812452113163723331),
    (5.0, 0.0, 0.5),
    (5.0, 0.7, 0.74242552584259177781),
    (5.0, 1.96, 0.94635602374735291354),
    (5.0, 4.0, 0.9948382922595842731),
    (10.0, -6.5, 0.000034477064542619843621),
    (10.0, -2.5, 0.015723422118304402125),
    (10.0, -1.0, 0.17044656615102993634),
    (10.0, -0.3, 0.3851603037828993064),
    (10.0, 0.0, 0.5),
    (10.0, 0.7, 0.75005621491355781892),
    (10.0, 1.96, 0.96078187987615014353),
    (10.0, 4.0, 0.99874083368763165387),
    (30.0, -6.5, 1.7390235439860112915e-7),
    (30.0, -2.5, 0.0090578245340333470509),
    (30.0, -1.0, 0.16265430771301494562),
    (30.0, -0.3, 0.38312305264217640883),
    (30.0, 0.0, 0.5),
    (30.0, 0.7, 0.755339778250164233),
    (30.0, 1.96, 0.97032884355197476184),
    (30.0, 4.0, 0.99980907718195812158),
    (100.0, -6.5, 1.5895070131177254873e-9),
    (100.0, -2.5, 0.0070228945620385887038),
    (100.0, -1.0, 0.1598620778920616802),
    (100.0, -0.3, 0.38239994015015174392),
    (100.0, 0.0, 0.5),
    (100.0, 0.7, 0.75722369677281330476),
    (100.0, 1.96, 0.97361054931688516698),
    (100.0, 4.0, 0.99993923817784961916),
    (1000.0, -6.5, 6.3271412660035813787e-11),
    (1000.0, -2.5, 0.0062892839005453984049),
    (1000.0, -1.0, 0.15877620904233615354),
    (1000.0, -0.3, 0.38211975208362202221),
    (1000.0, 0.0, 0.5),
    (1000.0, 0.7, 0.75795494300369881643),
    (1000.0, 1.96, 0.97486340752212564078),
    (1000.0, 4.0, 0.99996599504039560921),
];
pub const F_TABLE: [(f64, f64, f64, f64); 64] = [
    (1.0, 1.0, 0.05, 0.14004869609310202646),
    (1.0, 1.0, 0.3, 0.31900572003997710373),
    (1.0, 1.0, 0.8, 0.46455905439753998729),
    (1.0, 1.0, 1.0, 0.5),
    (1.0, 1.0, 1.7, 0.58347840977288587708),
    (1.0, 1.0, 3.2, 0.67548964169556205172),
    (1.0, 1.0, 6.0, 0.75324828557115013903),
    (1.0, 1.0, 15.0, 0.83913875348966751246),
    (1.0, 10.0, 0.05, 0.17243484079903247782),
    (1.0, 10.0, 0.3, 0.40410475920089421344),
    (1.0, 10.0, 0.8, 0.60788777958062265961),
    (1.0, 10.0, 1.0, 0.65910686769794012733),
    (1.0, 10.0, 1.7, 0.77849742300220983218),
    (1.0, 10.0, 3.2, 0.89607947930156214451),
    (1.0, 10.0, 6.0, 0.96571229353063583428),
    (1.0, 10.0, 15.0, 0.99690591331378910625),
    (2.0, 5.0, 0.05, 0.048301092871324196022),
    (2.0, 5.0, 0.3, 0.24672259046311537197),
    (2.0, 5.0, 0.8, 0.50046586330435654178),
    (2.0, 5.0, 1.0, 0.56879884962830786862),
    (2.0, 5.0, 1.7, 0.72664514249912855311),
    (2.0, 5.0, 3.2, 0.87260192010377772937),
    (2.0, 5.0, 6.0, 0.9530859736551349109),
    (2.0, 5.0, 15.0, 0.99228643932634230149),
    (3.0, 30.0, 0.05, 0.015073684607745887575),
    (3.0, 30.0, 0.3, 0.17488717787480085965),
    (3.0, 30.0, 0.8, 0.4963361506848823044),
    (3.0, 30.0, 1.0, 0.59364273312705127449),
    (3.0, 30.0, 1.7, 0.81188622915398485854),
    (3.0, 30.0, 3.2, 0.9626423486328328433),
    (3.0, 30.0, 6.0, 0.99750279007431770093),
    (3.0, 30.0, 15.0, 0.99999619908558829708),
    (5.0, 2.0, 0.05, 0.0041152263374485601784),
    (5.0, 2.0, 0.3, 0.1202425109463631425),
    (5.0, 2.0, 0.8, 0.36288736930121158689),
    (5.0, 2.0, 1.0, 0.43120115037169213138),
    (5.0, 2.0, 1.7, 0.58962252547270836727),
    (5.0, 2.0, 3.2, 0.74493553902780316476),
    (5.0, 2.0, 6.0, 0.85099731728190312418),
    (5.0, 2.0, 15.0, 0.936324409887510683),
    (10.0, 10.0, 0.05, 0.000026245882783704158963),
    (10.0, 10.0, 0.3, 0.035447158774611580754),
    (10.0, 10.0, 0.8, 0.36550690534077564606),
    (10.0, 10.0, 1.0, 0.5),
    (10.0, 10.0, 1.7, 0.79209542555566675757),
    (10.0, 10.0, 3.2, 0.95976355787537608408),
    (10.0, 10.0, 6.0, 0.99547026861811882145),
    (10.0, 10.0, 15.0, 0.99990293165319599211),
    (4.0, 200.0, 0.05, 0.0047195038776708296245),
    (4.0, 200.0, 0.3, 0.12229314910667809512),
    (4.0, 200.0, 0.8, 0.47353047492934192305),
    (4.0, 200.0, 1.0, 0.59131415594392954529),
    (4.0, 200.0, 1.7, 0.84856673914733213506),
    (4.0, 200.0, 3.2, 0.98581376313604645553),
    (4.0, 200.0, 6.0, 0.99985974655246254787),
    (4.0, 200.0, 15.0, 0.99999999990288959741),
    (20.0, 3.0, 0.05, 3.1016497407938091124e-6),
    (20.0, 3.0, 0.3, 0.040182157199237375546),
    (20.0, 3.0, 0.8, 0.31818311674382311488),
    (20.0, 3.0, 1.0, 0.41325191406246001793),
    (20.0, 3.0, 1.7, 0.62978346560868623668),
    (20.0, 3.0, 3.2, 0.81611798729134686825),
    (20.0, 3.0, 6.0, 0.91758839253970092163),
    (20.0, 3.0, 15.0, 0.97696107388082845208),
];
