/* Session flow: walks a participant through the three-session protocol,
 * delegating all presentation to the page and all rules to the service.
 *
 * Session 1: instructions -> practice (same reveal direction, practice
 * image) -> create -> questionnaire -> confirmation login.
 * Sessions 2-3: instructions -> login; session 3 ends with the exit
 * survey (including SUS) whether or not the login succeeded. A session-2
 * give-up can reset, which re-enters the creation flow and then waits
 * out the 24 h delay.
 */

import { ApiError, StudyApi } from './api.js';
import type { Assignment, Point, RevealInfo } from './api.js';

export interface RevealOutcome {
	/** Image-display signal (epoch seconds); login timing starts here. */
	displayedAt: number;
	revealStartedAt?: number;
	revealEndedAt?: number;
}

export interface FlowDelegate {
	showInstructions(session: number): Promise<void>;
	/** Play the reveal (or show the image immediately) and report timing. */
	runReveal(reveal: RevealInfo, imageId: string): Promise<RevealOutcome>;
	/** Collect exactly five clicks; null means the participant gave up. */
	capturePassword(purpose: 'practice' | 'create' | 'login'): Promise<Point[] | null>;
	collectQuestionnaire(session: number): Promise<Record<string, unknown>>;
	collectSus(): Promise<number[]>;
	confirmReset(): Promise<boolean>;
	notify(message: string): void;
}

export type FlowStatus =
	| 'completed'
	| 'failed'
	| 'reset-wait'
	| 'gave-up'
	| 'desktop-required'
	| 'session-not-open';

export interface FlowResult {
	session: number;
	status: FlowStatus;
}

export interface FlowOptions {
	viewportWidth?: number;
	maxLoginAttempts?: number; // per sitting; delegate can still give up earlier
	nowEpochS?: () => number;
}

const IMMEDIATE: (reveal: RevealInfo) => RevealInfo = (reveal) => ({
	direction: 'none',
	duration_s: reveal.duration_s,
});

export class SessionFlow {
	private readonly nowEpochS: () => number;

	constructor(
		private readonly api: StudyApi,
		private readonly userId: string,
		private readonly delegate: FlowDelegate,
		private readonly options: FlowOptions = {},
	) {
		this.nowEpochS = options.nowEpochS ?? (() => Date.now() / 1000);
	}

	async run(): Promise<FlowResult> {
		const assignment = await this.api.assignment(this.userId);
		const viewport =
			this.options.viewportWidth ??
			(typeof window !== 'undefined' ? window.innerWidth : Number.POSITIVE_INFINITY);
		if (viewport < assignment.image_width) {
			this.delegate.notify('A desktop browser is required for this study.');
			return { session: assignment.session, status: 'desktop-required' };
		}
		if (this.nowEpochS() < assignment.session_opens_at) {
			this.delegate.notify('This session is not open yet.');
			return { session: assignment.session, status: 'session-not-open' };
		}
		await this.delegate.showInstructions(assignment.session);
		if (assignment.session === 1) {
			return this.runSessionOne(assignment);
		}
		return this.runLoginSession(assignment);
	}

	private async runSessionOne(assignment: Assignment): Promise<FlowResult> {
		if (!assignment.practice_done) {
			// practice uses the same curtain direction on the practice image
			await this.delegate.runReveal(assignment.reveal, assignment.practice_image_id);
			const practicePoints = await this.delegate.capturePassword('practice');
			if (practicePoints === null) return { session: 1, status: 'gave-up' };
			await this.api.practiceComplete(this.userId);
		}
		const outcome = await this.createPassword(assignment);
		if (outcome === null) return { session: 1, status: 'gave-up' };

		const answers = await this.delegate.collectQuestionnaire(1);
		if (outcome.revealStartedAt !== undefined) {
			// reveal timing reaches the service alongside the questionnaire
			answers.reveal_started_at = outcome.revealStartedAt;
			answers.reveal_ended_at = outcome.revealEndedAt;
		}
		await this.api.questionnaire(this.userId, 1, answers);

		return this.confirmLogin(assignment);
	}

	private async createPassword(assignment: Assignment): Promise<RevealOutcome | null> {
		const outcome = await this.delegate.runReveal(assignment.reveal, assignment.image_id);
		const points = await this.delegate.capturePassword('create');
		if (points === null) return null;
		const creationDuration =
			outcome.revealEndedAt !== undefined
				? this.nowEpochS() - outcome.revealEndedAt
				: undefined;
		await this.api.createPassword(this.userId, points, creationDuration);
		return outcome;
	}

	/** The confirmation login that ends session 1 (image shown, no reveal). */
	private async confirmLogin(assignment: Assignment): Promise<FlowResult> {
		const attempts = this.options.maxLoginAttempts ?? 3;
		for (let i = 0; i < attempts; i++) {
			const shown = await this.delegate.runReveal(IMMEDIATE(assignment.reveal), assignment.image_id);
			const points = await this.delegate.capturePassword('login');
			if (points === null) break;
			const result = await this.api.login(this.userId, points, shown.displayedAt);
			if (result.success) return { session: 1, status: 'completed' };
			this.delegate.notify('Login failed; try again.');
		}
		// forgotten already? reset restarts creation on the same image/group
		if (await this.delegate.confirmReset()) {
			await this.api.reset(this.userId);
			const assignmentNow = await this.api.assignment(this.userId);
			const created = await this.createPassword(assignmentNow);
			if (created !== null) return this.confirmLogin(assignmentNow);
		}
		return { session: 1, status: 'gave-up' };
	}

	private async runLoginSession(assignment: Assignment): Promise<FlowResult> {
		const session = assignment.session;
		const attempts = this.options.maxLoginAttempts ?? 3;
		let succeeded = false;
		for (let i = 0; i < attempts && !succeeded; i++) {
			const shown = await this.delegate.runReveal(IMMEDIATE(assignment.reveal), assignment.image_id);
			const points = await this.delegate.capturePassword('login');
			if (points === null) break;
			try {
				const result = await this.api.login(this.userId, points, shown.displayedAt);
				succeeded = result.success;
			} catch (err) {
				if (err instanceof ApiError && err.code === 'session_closed') {
					this.delegate.notify(err.message);
					return { session, status: 'session-not-open' };
				}
				throw err;
			}
			if (!succeeded) this.delegate.notify('Login failed; try again.');
		}

		if (session === 2 && !succeeded) {
			if (await this.delegate.confirmReset()) {
				await this.api.reset(this.userId);
				const back = await this.api.assignment(this.userId); // now session 1 again
				const created = await this.createPassword(back);
				if (created !== null) {
					const confirmed = await this.confirmLogin(back);
					if (confirmed.status === 'completed') {
						this.delegate.notify(
							'Password reset. Session 2 reopens after the 24 hour wait.',
						);
						return { session, status: 'reset-wait' };
					}
				}
			}
			return { session, status: 'gave-up' };
		}

		if (session === 3) {
			// the exit survey runs on the failure path too
			const answers = await this.delegate.collectQuestionnaire(3);
			await this.api.questionnaire(this.userId, 3, answers);
			const sus = await this.delegate.collectSus();
			await this.api.sus(this.userId, sus);
		}
		return { session, status: succeeded ? 'completed' : 'failed' };
	}
}
