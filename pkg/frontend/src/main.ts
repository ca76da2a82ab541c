/* Page bootstrap: wires the flow delegate to real DOM.
 *
 * Expects ?user=<id> (and optionally &base=<service url>) in the query
 * string. Image assets come from the service's /images mount.
 */

import { StudyApi } from './api.js';
import type { Point, RevealInfo } from './api.js';
import { ClickCapture, PASSWORD_LENGTH } from './capture.js';
import { SessionFlow } from './flow.js';
import type { FlowDelegate, RevealOutcome } from './flow.js';
import { CurtainReveal } from './reveal.js';
import { STRATEGIES, SUS_QUESTION_COUNT, validateSusAnswers } from './survey.js';

const SUS_ITEMS = [
	'I think that I would like to use this system frequently.',
	'I found the system unnecessarily complex.',
	'I thought the system was easy to use.',
	'I think that I would need the support of a technical person to be able to use this system.',
	'I found the various functions in this system were well integrated.',
	'I thought there was too much inconsistency in this system.',
	'I would imagine that most people would learn to use this system very quickly.',
	'I found the system very cumbersome to use.',
	'I felt very confident using the system.',
	'I needed to learn a lot of things before I could get going with this system.',
];

function el<K extends keyof HTMLElementTagNameMap>(
	tag: K,
	attrs: Record<string, string> = {},
	text = '',
): HTMLElementTagNameMap[K] {
	const node = document.createElement(tag);
	for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
	if (text) node.textContent = text;
	return node;
}

class PageDelegate implements FlowDelegate {
	constructor(
		private readonly root: HTMLElement,
		private readonly baseUrl: string,
		private readonly imageWidth: number,
		private readonly imageHeight: number,
	) {}

	private clear(): HTMLElement {
		this.root.textContent = '';
		return this.root;
	}

	async showInstructions(session: number): Promise<void> {
		const root = this.clear();
		root.append(
			el('h2', {}, `Session ${session}`),
			el(
				'p',
				{},
				session === 1
					? 'You will create a graphical password by clicking five points on an image, then log in with it.'
					: 'Log in by clicking your five password points in order.',
			),
		);
		await this.button(root, 'Continue');
	}

	async runReveal(reveal: RevealInfo, imageId: string): Promise<RevealOutcome> {
		const root = this.clear();
		const stage = el('div', {
			style: `position:relative;width:${this.imageWidth}px;height:${this.imageHeight}px;`,
		});
		const img = el('img', {
			src: `${this.baseUrl}/images/${imageId}.png`,
			width: String(this.imageWidth),
			height: String(this.imageHeight),
			draggable: 'false',
		});
		const cover = el('div');
		stage.append(img, cover);
		root.append(stage);
		if (reveal.direction === 'none') {
			cover.remove();
			const displayedAt = Date.now() / 1000;
			return { displayedAt };
		}
		const curtain = new CurtainReveal(cover, {
			direction: reveal.direction,
			durationMs: reveal.duration_s * 1000,
		});
		const stamps = await curtain.play();
		cover.remove();
		return {
			displayedAt: Date.now() / 1000 - (stamps.endedAt - stamps.startedAt) / 1000,
			revealStartedAt: stamps.startedAt / 1000,
			revealEndedAt: stamps.endedAt / 1000,
		};
	}

	async capturePassword(purpose: 'practice' | 'create' | 'login'): Promise<Point[] | null> {
		const stage = this.root.querySelector('div');
		const img = this.root.querySelector('img');
		if (!stage || !img) throw new Error('reveal must run before capture');
		const counter = el('p', {}, 'Points: 0 / 5');
		const submit = el('button', { disabled: 'true' }, purpose === 'login' ? 'Log in' : 'Submit');
		const giveUp = el('button', {}, 'I give up');
		// the counter shows only a count, never click locations
		this.root.append(counter, submit, giveUp);
		const capture = new ClickCapture(img, this.imageWidth, this.imageHeight, (n) => {
			counter.textContent = `Points: ${n} / ${PASSWORD_LENGTH}`;
			if (n === PASSWORD_LENGTH) submit.removeAttribute('disabled');
		});
		capture.start();
		try {
			return await new Promise<Point[] | null>((resolve) => {
				submit.addEventListener('click', () => resolve(capture.takePoints()));
				giveUp.addEventListener('click', () => resolve(null));
			});
		} finally {
			capture.stop();
		}
	}

	async collectQuestionnaire(session: number): Promise<Record<string, unknown>> {
		const root = this.clear();
		root.append(el('h3', {}, 'Questionnaire'));
		const answers: Record<string, unknown> = {};
		if (session === 1) {
			const strategy = el('select');
			for (const s of STRATEGIES) strategy.append(el('option', { value: s }, s));
			const watched = el('input', { type: 'checkbox', checked: 'true' });
			const distracted = el('input', { type: 'checkbox' });
			root.append(
				el('label', {}, 'Password strategy: '),
				strategy,
				el('label', {}, ' I watched the image reveal '),
				watched,
				el('label', {}, ' I was distracted during the reveal '),
				distracted,
			);
			await this.button(root, 'Submit');
			answers.strategy = strategy.value || STRATEGIES[0];
			answers.watched_reveal = watched.checked;
			answers.distracted = distracted.checked;
		} else {
			const recorded = el('input', { type: 'checkbox' });
			root.append(el('label', {}, 'I recorded my password during the study '), recorded);
			await this.button(root, 'Submit');
			answers.recorded_password = recorded.checked;
		}
		return answers;
	}

	async collectSus(): Promise<number[]> {
		const root = this.clear();
		root.append(el('h3', {}, 'System Usability Scale'));
		const selects: HTMLSelectElement[] = [];
		for (let i = 0; i < SUS_QUESTION_COUNT; i++) {
			const select = el('select');
			for (let v = 1; v <= 5; v++) select.append(el('option', { value: String(v) }, String(v)));
			selects.push(select);
			root.append(el('p', {}, SUS_ITEMS[i]), select);
		}
		await this.button(root, 'Finish');
		const answers = selects.map((s) => Number(s.value || 3));
		const problem = validateSusAnswers(answers);
		if (problem) throw new Error(problem);
		return answers;
	}

	async confirmReset(): Promise<boolean> {
		const root = this.clear();
		root.append(el('p', {}, 'Forgot your password? You can reset and create a new one.'));
		const yes = el('button', {}, 'Reset my password');
		const no = el('button', {}, 'Not now');
		root.append(yes, no);
		return new Promise((resolve) => {
			yes.addEventListener('click', () => resolve(true));
			no.addEventListener('click', () => resolve(false));
		});
	}

	notify(message: string): void {
		const banner = el('p', { class: 'notice' }, message);
		this.root.prepend(banner);
		setTimeout(() => banner.remove(), 4000);
	}

	private button(root: HTMLElement, label: string): Promise<void> {
		const b = el('button', {}, label);
		root.append(b);
		return new Promise((resolve) => b.addEventListener('click', () => resolve()));
	}
}

export async function bootstrap(root: HTMLElement): Promise<void> {
	const params = new URLSearchParams(window.location.search);
	const userId = params.get('user');
	const baseUrl = params.get('base') ?? '';
	if (!userId) {
		root.textContent = 'Missing ?user=<id> in the URL.';
		return;
	}
	const api = new StudyApi(baseUrl);
	let assignment;
	try {
		assignment = await api.assignment(userId);
	} catch {
		await api.enroll(userId, /iPhone|Android|Mobile/i.test(navigator.userAgent));
		assignment = await api.assignment(userId);
	}
	const delegate = new PageDelegate(root, baseUrl, assignment.image_width, assignment.image_height);
	const flow = new SessionFlow(api, userId, delegate);
	const result = await flow.run();
	root.textContent = '';
	root.append(el('h2', {}, `Session ${result.session}: ${result.status}`));
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
	void bootstrap(document.getElementById('app') as HTMLElement);
}
